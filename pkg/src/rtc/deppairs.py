"""Dependency-pair transformations tailored to complexity analysis.

The weak variants keep the full right-hand side structure: the maximal
defined-or-variable-rooted (resp. defined-rooted) subterms are collected
under a fresh compound symbol, so every step of the original system is
reflected by the transformed one instead of just termination being
preserved. Standard dependency pairs are provided for comparison and as a
negative control; they are not a sound basis for height bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .terms import App, Symbol, Term, Var, funs_of
from .trs import TRS, Rule


def sharp(sym: Symbol) -> Symbol:
    return Symbol(sym.name + "#", sym.arity)


def sharp_term(t: Term) -> Term:
    """Mark the root: variables stay themselves."""
    if isinstance(t, Var):
        return t
    return App(sharp(t.sym), t.args)


@dataclass(frozen=True)
class DpProblem:
    pairs: tuple[Rule, ...]
    origin: TRS
    flavor: str  # "wdp" | "widp" | "dp"
    compounds: tuple[Symbol, ...]

    def display_index(self, position: int) -> int:
        """Pairs are numbered after the origin rules, 1-based."""
        return len(self.origin.rules) + position + 1

    @property
    def sharp_symbols(self) -> frozenset[Symbol]:
        return frozenset(sharp(d) for d in self.origin.defined)

    def format_pairs(self) -> str:
        from .trs import format_rule

        return "\n".join(
            f"{self.display_index(i)}: {format_rule(p)}" for i, p in enumerate(self.pairs)
        )


class _CompoundNamer:
    """Fresh compound symbols c_1, c_2, ... skipping taken names."""

    def __init__(self, taken: set[str]):
        self._taken = taken
        self._next = 1
        self.created: list[Symbol] = []

    def fresh(self, arity: int) -> Symbol:
        while True:
            name = f"c_{self._next}"
            self._next += 1
            if name not in self._taken:
                self._taken.add(name)
                sym = Symbol(name, arity)
                self.created.append(sym)
                return sym


def _maximal_parts(t: Term, defined: frozenset[Symbol], include_vars: bool) -> list[Term]:
    """Maximal subterms rooted in the defined symbols (plus variables if asked)."""
    if isinstance(t, Var):
        return [t] if include_vars else []
    if t.sym in defined:
        return [t]
    out: list[Term] = []
    for a in t.args:
        out.extend(_maximal_parts(a, defined, include_vars))
    return out


def _weak_pairs(trs: TRS, include_vars: bool, flavor: str) -> DpProblem:
    taken = {s.name for s in trs.signature}
    taken.update(sharp(d).name for d in trs.defined)
    namer = _CompoundNamer(taken)
    pairs: list[Rule] = []
    for rule in trs.rules:
        parts = _maximal_parts(rule.rhs, trs.defined, include_vars)
        if len(parts) == 1:
            rhs = sharp_term(parts[0])
        else:
            # zero or several parts are grouped under a fresh compound
            com = namer.fresh(len(parts))
            rhs = App(com, tuple(sharp_term(p) for p in parts))
        pairs.append(Rule(sharp_term(rule.lhs), rhs))
    return DpProblem(tuple(pairs), trs, flavor, tuple(namer.created))


def weak_dependency_pairs(trs: TRS) -> DpProblem:
    """One pair per rule; variables count as dependable subterms."""
    return _weak_pairs(trs, include_vars=True, flavor="wdp")


def weak_innermost_dependency_pairs(trs: TRS) -> DpProblem:
    """One pair per rule; only defined-rooted subterms are kept."""
    return _weak_pairs(trs, include_vars=False, flavor="widp")


def standard_dependency_pairs(trs: TRS) -> DpProblem:
    pairs: list[Rule] = []
    seen: set[Rule] = set()
    for rule in trs.rules:
        proper: set[Term] = set()
        stack = list(rule.lhs.args) if isinstance(rule.lhs, App) else []
        while stack:
            node = stack.pop()
            proper.add(node)
            if isinstance(node, App):
                stack.extend(node.args)
        work = [rule.rhs]
        found: list[Term] = []
        while work:
            node = work.pop()
            if isinstance(node, App):
                if node.sym in trs.defined and node not in proper:
                    found.append(node)
                work.extend(reversed(node.args))
        for u in found:
            pair = Rule(sharp_term(rule.lhs), sharp_term(u))
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    return DpProblem(tuple(pairs), trs, "dp", ())


def usable_rules(pairs: Iterable[Rule], trs: TRS) -> tuple[int, ...]:
    """1-based origin rule indices reachable from the pair right-hand sides.

    A rule is usable when its defined root occurs in some pair rhs or in the
    rhs of an already-usable rule; this is the defined-symbol closure.
    """
    needed: set[Symbol] = set()
    for p in pairs:
        needed |= funs_of(p.rhs) & trs.defined
    usable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for idx, rule in enumerate(trs.rules, start=1):
            if idx not in usable and rule.root in needed:
                usable.add(idx)
                needed |= funs_of(rule.rhs) & trs.defined
                changed = True
    return tuple(sorted(usable))


def usable_rule_list(pairs: Iterable[Rule], trs: TRS) -> tuple[Rule, ...]:
    return tuple(trs.rules[i - 1] for i in usable_rules(pairs, trs))
