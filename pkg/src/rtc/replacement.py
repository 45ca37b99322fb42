"""Replacement maps: which argument positions rewriting must be allowed to touch.

A replacement map is a set of (symbol, argument index) entries with 1-based
indices. Positions reachable through mapped argument slots are "replacing";
an analysis only has to respect rewriting at replacing positions of the
start term's reducts, which is what makes restricted interpretation shapes
applicable to systems that are not monotone everywhere.
"""

from __future__ import annotations

from typing import Iterable

from .terms import App, FreshVars, Pos, Symbol, Term, Var, rename_apart, unify, vars_of
from .trs import Rule

ReplacementMap = frozenset[tuple[Symbol, int]]

EMPTY_MAP: ReplacementMap = frozenset()


def make_map(entries: Iterable[tuple[Symbol, int]]) -> ReplacementMap:
    return frozenset(entries)


def replacing_positions(t: Term, mu: ReplacementMap) -> list[Pos]:
    """Replacing positions of t: the root, plus mapped slots of replacing nodes."""
    out: list[Pos] = []
    stack: list[tuple[Term, Pos]] = [(t, ())]
    while stack:
        node, pos = stack.pop()
        out.append(pos)
        if isinstance(node, App):
            for i in range(len(node.args), 0, -1):
                if (node.sym, i) in mu:
                    stack.append((node.args[i - 1], pos + (i,)))
    return out


def nonreplacing_positions(t: Term, mu: ReplacementMap) -> list[Pos]:
    """Non-replacing positions of t."""
    replacing = set(replacing_positions(t, mu))
    out: list[Pos] = []
    stack: list[tuple[Term, Pos]] = [(t, ())]
    while stack:
        node, pos = stack.pop()
        if pos not in replacing:
            out.append(pos)
        if isinstance(node, App):
            for i in range(len(node.args), 0, -1):
                stack.append((node.args[i - 1], pos + (i,)))
    return out


def _nonreplacing_subterms(s: Term, mu: ReplacementMap) -> set[Term]:
    """Subterms of s occurring at some non-replacing position (identity set)."""
    replacing = set(replacing_positions(s, mu))
    out: set[Term] = set()
    stack: list[tuple[Term, Pos]] = [(s, ())]
    while stack:
        node, pos = stack.pop()
        if pos not in replacing:
            out.add(node)
        if isinstance(node, App):
            for i in range(len(node.args), 0, -1):
                stack.append((node.args[i - 1], pos + (i,)))
    return out


def shielded_cap(mu: ReplacementMap, rules: Iterable[Rule], s: Term, t: Term) -> Term:
    """Cap t relative to the left-hand side s it came from.

    Keeps subterms that s shields at a non-replacing position, rebuilds
    applications whose capped form cannot be instantiated to a redex, and
    abstracts everything else to fresh variables. The result equals t (by
    identity) exactly when no abstraction happened anywhere inside.
    """
    lhss = [r.lhs for r in rules]
    shielded = _nonreplacing_subterms(s, mu)
    fresh = FreshVars(avoid=vars_of(s) | vars_of(t))

    def cap(u: Term) -> Term:
        if u in shielded:
            return u
        if isinstance(u, Var):
            return fresh.fresh()
        capped = App(u.sym, tuple(cap(a) for a in u.args))
        avoid = vars_of(capped)
        for lhs in lhss:
            if unify(capped, rename_apart(lhs, avoid)) is not None:
                return fresh.fresh()
        return capped

    return cap(t)


def needed_positions(mu: ReplacementMap, rules: Iterable[Rule]) -> ReplacementMap:
    """One refinement step: argument slots whose contents a rewrite could need.

    An entry (f, i) is produced when some right-hand side contains an
    occurrence f(r_1, ..., r_n) whose argument r_i does not survive capping
    against the rule's left-hand side.
    """
    rules = list(rules)
    out: set[tuple[Symbol, int]] = set()
    for rule in rules:
        stack = [rule.rhs]
        while stack:
            node = stack.pop()
            if not isinstance(node, App):
                continue
            stack.extend(node.args)
            for i, arg in enumerate(node.args, start=1):
                if (node.sym, i) in out:
                    continue
                if shielded_cap(mu, rules, rule.lhs, arg) is not arg:
                    out.add((node.sym, i))
    return frozenset(out)


def innermost_usable_map(rules: Iterable[Rule]) -> ReplacementMap:
    """The one-step map: sufficient for innermost rewriting."""
    return needed_positions(EMPTY_MAP, rules)


def usable_map(rules: Iterable[Rule]) -> ReplacementMap:
    """Least fixed point of the refinement step: sufficient for full rewriting."""
    rules = list(rules)
    symbols: set[Symbol] = set()
    for r in rules:
        stack = [r.lhs, r.rhs]
        while stack:
            node = stack.pop()
            if isinstance(node, App):
                symbols.add(node.sym)
                stack.extend(node.args)
    max_arity = max((s.arity for s in symbols), default=0)
    cap_rounds = max(1, len(symbols) * max_arity)
    mu: ReplacementMap = EMPTY_MAP
    for _ in range(cap_rounds):
        nxt = frozenset(mu | needed_positions(mu, rules))
        if nxt == mu:
            break
        mu = nxt
    return mu


def format_map(mu: ReplacementMap, signature: Iterable[Symbol]) -> str:
    """One line per symbol: 'f: {1,3}' with symbols sorted by name."""
    by_symbol: dict[Symbol, list[int]] = {}
    for sym, i in mu:
        by_symbol.setdefault(sym, []).append(i)
    lines = []
    for sym in sorted(signature, key=lambda s: (s.name, s.arity)):
        slots = ",".join(str(i) for i in sorted(by_symbol.get(sym, [])))
        lines.append(f"{sym.name}: {{{slots}}}")
    return "\n".join(lines)
