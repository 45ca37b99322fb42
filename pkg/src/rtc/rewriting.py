"""Rewrite relations, relative rewriting, and a derivation-height oracle.

The oracle is deliberately brute force: it explores the reduct graph with
memoization and reports exact heights, so analytic bounds elsewhere in the
package can be cross-checked against ground truth on small inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

from .replacement import ReplacementMap
from .terms import (
    App,
    Pos,
    Symbol,
    Term,
    Var,
    apply_subst,
    match,
    rename_apart,
    replace_at,
    term_to_str,
    unify,
    var_counts,
    vars_of,
)
from .trs import Rule, TRS


class ClosureBudgetError(RuntimeError):
    """Raised when a relative-step closure grows past its node budget."""


class _DivergedType:
    """Marker for heights that are unbounded (cycle) or past the fuel limit."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "diverged"


DIVERGED = _DivergedType()

Height = int | _DivergedType


class ClosureBudget:
    __slots__ = ("limit", "spent")

    def __init__(self, limit: int = 10**5):
        self.limit = limit
        self.spent = 0

    def spend(self, amount: int = 1) -> None:
        self.spent += amount
        if self.spent > self.limit:
            raise ClosureBudgetError("relative closure budget exceeded")


def _as_rules(system: TRS | Iterable[Rule]) -> tuple[Rule, ...]:
    if isinstance(system, TRS):
        return system.rules
    return tuple(system)


class Rewriter:
    """One-step rewriting for a fixed rule list under a fixed mode.

    mode "full" allows any redex, "innermost" requires the redex's proper
    subterms to be normal forms (with respect to nf_rules, which defaults to
    the rewriter's own rules), and "mu" restricts contraction to replacing
    positions of the given map. Successor sets are memoized per term, which
    is safe because eligibility in every mode depends only on the subterm
    and its argument slot, never on the absolute position.
    """

    __slots__ = ("rules", "mode", "mu", "nf_rules", "_by_root", "_nf_by_root", "_nf_memo", "_succ_memo")

    def __init__(
        self,
        rules: TRS | Iterable[Rule],
        mode: str = "full",
        mu: ReplacementMap | None = None,
        nf_rules: TRS | Iterable[Rule] | None = None,
    ):
        self.rules = _as_rules(rules)
        if mode not in ("full", "innermost", "mu"):
            raise ValueError(f"unknown rewrite mode: {mode}")
        if mode == "mu" and mu is None:
            raise ValueError("mu mode needs a replacement map")
        self.mode = mode
        self.mu = mu if mu is not None else frozenset()
        self.nf_rules = self.rules if nf_rules is None else _as_rules(nf_rules)
        self._by_root: dict[Symbol, list[tuple[int, Rule]]] = {}
        for idx, rule in enumerate(self.rules, start=1):
            self._by_root.setdefault(rule.root, []).append((idx, rule))
        self._nf_by_root: dict[Symbol, list[Rule]] = {}
        for rule in self.nf_rules:
            self._nf_by_root.setdefault(rule.root, []).append(rule)
        self._nf_memo: dict[Term, bool] = {}
        self._succ_memo: dict[Term, tuple[Term, ...]] = {}

    def is_normal_form(self, t: Term) -> bool:
        memo = self._nf_memo
        work: list[tuple[Term, bool]] = [(t, False)]
        while work:
            node, ready = work.pop()
            if node in memo:
                continue
            if isinstance(node, Var):
                memo[node] = True
            elif not ready:
                work.append((node, True))
                for a in node.args:
                    if a not in memo:
                        work.append((a, False))
            elif not all(memo[a] for a in node.args):
                memo[node] = False
            else:
                memo[node] = not any(
                    match(rule.lhs, node) is not None for rule in self._nf_by_root.get(node.sym, ())
                )
        return memo[t]

    def _descend(self, sym: Symbol, i: int) -> bool:
        if self.mode == "mu":
            return (sym, i) in self.mu
        return True

    def _root_eligible(self, node: App) -> bool:
        if self.mode != "innermost":
            return True
        return all(self.is_normal_form(a) for a in node.args)

    def successors(self, t: Term) -> tuple[Term, ...]:
        memo = self._succ_memo
        work: list[tuple[Term, bool]] = [(t, False)]
        while work:
            node, ready = work.pop()
            if node in memo:
                continue
            if isinstance(node, Var):
                memo[node] = ()
                continue
            if not ready:
                work.append((node, True))
                for i, a in enumerate(node.args, start=1):
                    if self._descend(node.sym, i) and a not in memo:
                        work.append((a, False))
                continue
            out: list[Term] = []
            if self._root_eligible(node):
                for _, rule in self._by_root.get(node.sym, ()):
                    subst = match(rule.lhs, node)
                    if subst is not None:
                        out.append(apply_subst(rule.rhs, subst))
            for i, a in enumerate(node.args, start=1):
                if not self._descend(node.sym, i):
                    continue
                prefix, suffix = node.args[: i - 1], node.args[i:]
                for a2 in memo[a]:
                    out.append(App(node.sym, prefix + (a2,) + suffix))
            memo[node] = tuple(dict.fromkeys(out))
        return memo[t]

    def reducts(self, t: Term) -> list[tuple[Pos, int, Term]]:
        """All one-step reducts as (position, 1-based rule index, result)."""
        out: list[tuple[Pos, int, Term]] = []
        stack: list[tuple[Term, Pos, bool]] = [(t, (), True)]
        while stack:
            node, pos, replacing = stack.pop()
            if not isinstance(node, App):
                continue
            if replacing and self._root_eligible(node):
                for idx, rule in self._by_root.get(node.sym, ()):
                    subst = match(rule.lhs, node)
                    if subst is not None:
                        out.append((pos, idx, replace_at(t, pos, apply_subst(rule.rhs, subst))))
            for i in range(len(node.args), 0, -1):
                child_replacing = replacing and (self.mode != "mu" or (node.sym, i) in self.mu)
                stack.append((node.args[i - 1], pos + (i,), child_replacing))
        out.sort(key=lambda item: (item[0], item[1]))
        return out


@dataclass(frozen=True)
class RelativeProblem:
    """Count strict steps, allow arbitrarily many weak steps around each."""

    strict: tuple[Rule, ...]
    weak: tuple[Rule, ...]

    @staticmethod
    def of(strict: TRS | Iterable[Rule], weak: TRS | Iterable[Rule]) -> "RelativeProblem":
        return RelativeProblem(_as_rules(strict), _as_rules(weak))


class RelativeRewriter:
    """Successors under strict-modulo-weak rewriting.

    In innermost mode both component relations are restricted by normality
    with respect to the combined system.
    """

    __slots__ = ("problem", "mode", "budget_limit", "_strict", "_weak", "_succ_memo")

    def __init__(self, problem: RelativeProblem, mode: str = "full", budget_limit: int = 10**5):
        self.problem = problem
        self.mode = mode
        self.budget_limit = budget_limit
        nf_rules = problem.strict + problem.weak if mode == "innermost" else None
        self._strict = Rewriter(problem.strict, mode, nf_rules=nf_rules)
        self._weak = Rewriter(problem.weak, mode, nf_rules=nf_rules)
        self._succ_memo: dict[Term, tuple[Term, ...]] = {}

    def _weak_closure(self, seeds: Iterable[Term], budget: ClosureBudget) -> set[Term]:
        seen: set[Term] = set()
        frontier = list(seeds)
        while frontier:
            u = frontier.pop()
            if u in seen:
                continue
            budget.spend()
            seen.add(u)
            frontier.extend(self._weak.successors(u))
        return seen

    def successors(self, t: Term, budget: ClosureBudget | None = None) -> tuple[Term, ...]:
        cached = self._succ_memo.get(t)
        if cached is not None:
            return cached
        if budget is None:
            budget = ClosureBudget(self.budget_limit)
        before = self._weak_closure([t], budget)
        mids: list[Term] = []
        for u in before:
            mids.extend(self._strict.successors(u))
        after = self._weak_closure(mids, budget)
        result = tuple(sorted(after, key=term_to_str))
        self._succ_memo[t] = result
        return result


Successors = Callable[[Term], Sequence[Term]]


class _Frame:
    __slots__ = ("term", "succs", "idx", "best", "summing", "diverged")

    def __init__(self, term: Term, succs: Sequence[Term], summing: bool = False):
        self.term = term
        self.succs = succs
        self.idx = 0
        self.best = 0
        self.summing = summing
        self.diverged = False


def _height_dfs(
    t: Term,
    succ: Successors,
    fuel: int,
    memo: dict[Term, Height],
    rule_roots: frozenset[Symbol] | None = None,
) -> Height:
    """Longest-path search over the reduct graph.

    When rule_roots is given, a term whose root is not among them can never
    become a redex itself, so its derivations are interleavings of argument
    derivations and its height is the sum of the argument heights. Such
    terms open a summing frame instead of enumerating reducts.
    """

    def make_frame(node: Term) -> _Frame:
        if (
            rule_roots is not None
            and isinstance(node, App)
            and node.args
            and node.sym not in rule_roots
        ):
            return _Frame(node, node.args, summing=True)
        return _Frame(node, succ(node))

    if t in memo:
        return memo[t]
    onstack: set[Term] = {t}
    frames = [make_frame(t)]
    while frames:
        frame = frames[-1]
        if not frame.diverged and frame.idx < len(frame.succs):
            child = frame.succs[frame.idx]
            frame.idx += 1
            if child in memo:
                val = memo[child]
                if val is DIVERGED:
                    frame.diverged = True
                elif frame.summing:
                    frame.best += val
                else:
                    frame.best = max(frame.best, val)
            elif child in onstack:
                # a reachable cycle gives unbounded derivations
                frame.diverged = True
            else:
                onstack.add(child)
                frames.append(make_frame(child))
            continue
        if frame.diverged:
            value: Height = DIVERGED
        elif frame.summing:
            value = frame.best
            if value > fuel:
                value = DIVERGED
        elif not frame.succs:
            value = 0
        else:
            value = frame.best + 1
            if value > fuel:
                value = DIVERGED
        memo[frame.term] = value
        onstack.discard(frame.term)
        frames.pop()
        if frames:
            parent = frames[-1]
            if value is DIVERGED:
                parent.diverged = True
            elif parent.summing:
                parent.best += value
            else:
                parent.best = max(parent.best, value)
    return memo[t]


@lru_cache(maxsize=256)
def _steps_commute(rules: tuple[Rule, ...]) -> bool:
    """True when every maximal derivation from a term has the same length:
    all rules are left- and right-linear with no erased variables, and no
    two left-hand sides overlap. Each redex then has exactly one residual
    under any other step, so steps of co-initial maximal derivations are in
    bijection and the longest derivation is as long as any derivation."""
    for rule in rules:
        left = var_counts(rule.lhs)
        if any(n != 1 for n in left.values()):
            return False
        if var_counts(rule.rhs) != left:
            return False
    for outer in rules:
        for inner in rules:
            probe = rename_apart(inner.lhs, vars_of(outer.lhs))
            # skip only the trivial self-overlap of a rule at its own root
            stack: list[tuple[Term, bool]] = [(outer.lhs, inner is outer)]
            while stack:
                node, skip = stack.pop()
                if isinstance(node, App):
                    if not skip and unify(node, probe) is not None:
                        return False
                    stack.extend((a, False) for a in node.args)
    return True


def _single_run_height(t: Term, engine: "Rewriter", fuel: int) -> Height:
    steps = 0
    while True:
        succs = engine.successors(t)
        if not succs:
            return steps
        steps += 1
        if steps > fuel:
            return DIVERGED
        t = succs[0]


def derivation_height(
    t: Term,
    system: TRS | Iterable[Rule] | RelativeProblem,
    mode: str = "full",
    fuel: int = 10**5,
    mu: ReplacementMap | None = None,
    memo: dict[Term, Height] | None = None,
) -> Height:
    """Length of the longest derivation from t, or DIVERGED.

    For a RelativeProblem only strict steps are counted. Pass a shared memo
    dict to amortize work across many start terms of the same system.
    """
    if isinstance(system, RelativeProblem):
        engine: Rewriter | RelativeRewriter = RelativeRewriter(system, mode)
        if memo is None:
            memo = {}
        return _height_dfs(t, engine.successors, fuel, memo)
    engine = Rewriter(system, mode, mu=mu)
    if memo is None:
        memo = {}
    rule_roots: frozenset[Symbol] | None = None
    if mode in ("full", "innermost"):
        # with one residual per redex per step any derivation is longest,
        # so one run suffices on orthogonal variable-linear systems
        if _steps_commute(engine.rules):
            return _single_run_height(t, engine, fuel)
        rule_roots = frozenset(r.root for r in engine.rules)
    return _height_dfs(t, engine.successors, fuel, memo, rule_roots)


def _compositions(total: int, parts: int):
    """All tuples of positive ints of length parts summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for head in range(1, total - parts + 2):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def ground_constructor_terms(trs: TRS, max_size: int) -> dict[int, list[Term]]:
    """Ground constructor terms grouped by exact size."""
    by_size: dict[int, list[Term]] = {s: [] for s in range(1, max_size + 1)}
    constructors = sorted(trs.constructors, key=lambda s: (s.name, s.arity))
    for size in range(1, max_size + 1):
        for c in constructors:
            if c.arity == 0:
                if size == 1:
                    by_size[size].append(App(c, ()))
                continue
            for split in _compositions(size - 1, c.arity):
                pools = [by_size[s] for s in split]
                if any(not pool for pool in pools):
                    continue
                for args in product(*pools):
                    by_size[size].append(App(c, args))
    return by_size


def basic_terms_up_to(trs: TRS, max_size: int) -> list[Term]:
    """All ground basic terms of size <= max_size, ordered by size then text."""
    ground = ground_constructor_terms(trs, max_size)
    out: list[Term] = []
    for f in sorted(trs.defined, key=lambda s: (s.name, s.arity)):
        if f.arity == 0:
            out.append(App(f, ()))
            continue
        for size in range(f.arity + 1, max_size + 1):
            for split in _compositions(size - 1, f.arity):
                pools = [ground[s] for s in split]
                if any(not pool for pool in pools):
                    continue
                for args in product(*pools):
                    out.append(App(f, args))
    return sorted(set(out), key=lambda t: (t.size, term_to_str(t)))


def runtime_complexity(
    trs: TRS,
    n: int,
    mode: str = "full",
    fuel: int = 10**5,
    memo: dict[Term, Height] | None = None,
) -> tuple[int, bool]:
    """Max derivation height over ground basic terms of size <= n.

    Returns (height, diverged) where diverged reports whether any sampled
    term had unbounded or fuel-exceeding height; the height is the max over
    the remaining terms.
    """
    engine = Rewriter(trs, mode)
    if memo is None:
        memo = {}
    single_run = mode in ("full", "innermost") and _steps_commute(engine.rules)
    rule_roots = frozenset(r.root for r in engine.rules)
    best = 0
    diverged = False
    for t in basic_terms_up_to(trs, n):
        if single_run:
            h = _single_run_height(t, engine, fuel)
        else:
            h = _height_dfs(t, engine.successors, fuel, memo, rule_roots)
        if h is DIVERGED:
            diverged = True
        else:
            best = max(best, h)
    return best, diverged
