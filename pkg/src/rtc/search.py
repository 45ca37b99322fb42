"""Backtracking synthesis of matrix interpretations.

The search assigns one scalar coefficient at a time. Every cell of every
coefficient matrix carries an integer interval; an assignment pins one cell
and then the variable-domination constraints of all rules are propagated to
a fixpoint, tightening the intervals of still-unassigned cells. All entries
are non-negative, so a product of interval matrices evaluated once at the
lower and once at the upper bounds brackets every completion, and a
coefficient inequality with a single undetermined factor can be solved for
that factor's cells. Propagation is what lets a contradiction between two
rules that share an unassigned matrix surface at the assignment that
created it rather than deep in the subtree below.

Backtracking is conflict-directed. Each tightened cell remembers which
assignments its bounds derive from; a failed check implicates the union of
those causes, so when a slot's domain is exhausted the search jumps
straight back to the deepest implicated slot. An exhausted domain with an
empty conflict set proves the whole problem unsatisfiable.

A successful leaf is never trusted directly: the candidate is rebuilt as a
plain interpretation and re-verified with the orientation, monotonicity,
gap and degree checks of the certificate layer.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping

from .interp import (
    LinearFunc,
    MatrixInterpretation,
    degree,
    identity_matrix,
    is_mu_monotone,
    is_triangular_on,
    mat_add,
    mat_mul,
    orients_all,
    weight_gap_delta,
)
from .terms import Symbol, Term, Var, funs_of
from .trs import Rule

SHAPES = ("free", "triangular", "unit", "ones")


@dataclass
class Budget:
    max_nodes: int = 200_000
    deadline: float | None = None
    nodes: int = 0
    stopped: bool = False

    def step(self) -> bool:
        self.nodes += 1
        if self.nodes > self.max_nodes:
            self.stopped = True
        elif self.deadline is not None and time.monotonic() > self.deadline:
            self.stopped = True
        return not self.stopped


@dataclass
class SearchProblem:
    dim: int
    coeff_bound: int
    strict: tuple[Rule, ...]
    weak: tuple[Rule, ...] = ()
    gap: tuple[Rule, ...] = ()
    mu: frozenset[tuple[Symbol, int]] = frozenset()
    shapes: Mapping[Symbol, str] = field(default_factory=dict)
    degree_cap: int | None = None
    degree_scope: frozenset[Symbol] | None = None
    # optional tighter cap for matrix cells only; constants keep coeff_bound
    mat_bound: int | None = None


@dataclass
class SearchOutcome:
    found: MatrixInterpretation | None
    nodes: int
    candidates: int
    elapsed: float
    complete: bool


@dataclass(frozen=True)
class _Slot:
    sym: Symbol
    kind: str  # "mat" | "const"
    arg: int
    row: int
    col: int
    lo: int
    hi: int


def _symbol_order(rules: list[Rule], symbols: list[Symbol]) -> list[Symbol]:
    """Assign first the symbols that finish whole rules early.

    Greedy: repeatedly pick the symbol completing the most not-yet-complete
    rules, breaking ties by occurrence count and then name.
    """
    rule_syms = [funs_of(r.lhs) | funs_of(r.rhs) for r in rules]
    occ: dict[Symbol, int] = {s: 0 for s in symbols}
    for r in rules:
        for t in (r.lhs, r.rhs):
            for s in funs_of(t):
                occ[s] = occ.get(s, 0) + 1
    chosen: set[Symbol] = set()
    order: list[Symbol] = []
    remaining = sorted(symbols, key=lambda s: (s.name, s.arity))
    while remaining:
        def gain(s: Symbol) -> tuple[int, int, str]:
            done = sum(1 for rs in rule_syms if rs and rs <= (chosen | {s}))
            return (-done, -occ.get(s, 0), s.name)

        best = min(remaining, key=gain)
        remaining.remove(best)
        chosen.add(best)
        order.append(best)
    return order


class _Search:
    def __init__(self, problem: SearchProblem, budget: Budget):
        if problem.dim < 1:
            raise ValueError("dimension must be positive")
        if problem.degree_cap is not None and problem.degree_scope is None:
            raise ValueError("degree cap needs a scope")
        self.p = problem
        self.budget = budget
        self.dim = problem.dim
        self.rules: list[tuple[Rule, str]] = (
            [(r, "strict") for r in problem.strict]
            + [(r, "weak") for r in problem.weak]
            + [(r, "gap") for r in problem.gap]
        )
        syms: dict[Symbol, None] = {}
        for r, _ in self.rules:
            for t in (r.lhs, r.rhs):
                for s in funs_of(t):
                    syms.setdefault(s)
        self.symbols = list(syms)
        self.shapes: dict[Symbol, str] = {}
        for s in self.symbols:
            shape = problem.shapes.get(s, "free")
            if shape not in SHAPES:
                raise ValueError(f"unknown shape {shape!r}")
            if shape == "ones" and problem.dim != 1:
                raise ValueError("unit-coefficient scalar shape needs dimension 1")
            self.shapes[s] = shape
        # monotonicity duties for symbols outside the rules belong to whoever
        # completes the interpretation, not to this search
        self.mu_local = frozenset((s, i) for s, i in problem.mu if s in syms)
        mono: dict[Symbol, set[int]] = {}
        for sym, i in self.mu_local:
            mono.setdefault(sym, set()).add(i)

        # mutable current interval state per symbol
        self.mats_lo: dict[Symbol, list] = {}
        self.mats_hi: dict[Symbol, list] = {}
        self.const_lo: dict[Symbol, list] = {}
        self.const_hi: dict[Symbol, list] = {}
        self.slots: list[_Slot] = []
        order = _symbol_order([r for r, _ in self.rules], self.symbols)
        self.infeasible = False
        for sym in order:
            self._init_symbol(sym, mono.get(sym, set()))
        # coefficient matrices decide variable domination and the degree, so
        # settle every matrix cell before any constant: a doomed coefficient
        # choice must not be rediscovered under each constant combination
        self.slots.sort(key=lambda s: s.kind == "const")

        self.rules_of: dict[Symbol, list[int]] = {s: [] for s in self.symbols}
        for idx, (r, _) in enumerate(self.rules):
            for s in funs_of(r.lhs) | funs_of(r.rhs):
                self.rules_of[s].append(idx)

        # which slots each check can actually depend on, per coordinate:
        # row k of a product M1*M2*...*Mn is M1[k,:] times the rest, so a
        # violation in coordinate k implicates only row k of the first matrix
        # on each multiplication path, every cell of the deeper ones, and the
        # constant slots of the occurring symbols
        d = self.dim
        mat_ids: dict[tuple[Symbol, int], list[int]] = {}
        mat_row_ids: dict[tuple[Symbol, int, int], list[int]] = {}
        const_ids: dict[Symbol, list[int]] = {}
        for i, slot in enumerate(self.slots):
            if slot.kind == "mat":
                mat_ids.setdefault((slot.sym, slot.arg), []).append(i)
                mat_row_ids.setdefault((slot.sym, slot.arg, slot.row), []).append(i)
            else:
                const_ids.setdefault(slot.sym, []).append(i)

        def path_cells(first, deep, k: int) -> set[int]:
            cells: set[int] = set()
            if first is not None:
                cells.update(mat_row_ids.get((first[0], first[1], k), ()))
            for hop in deep:
                cells.update(mat_ids.get(hop, ()))
            return cells

        def walk(t: Term, first, deep: frozenset, var_dep: dict,
                 const_mats: list[set[int]], const_syms: set[Symbol]) -> None:
            if isinstance(t, Var):
                per = var_dep.setdefault(t, [set() for _ in range(d)])
                for k in range(d):
                    per[k] |= path_cells(first, deep, k)
                return
            const_syms.add(t.sym)
            for k in range(d):
                const_mats[k] |= path_cells(first, deep, k)
            for a, arg in enumerate(t.args):
                if first is None:
                    walk(arg, (t.sym, a), deep, var_dep, const_mats, const_syms)
                else:
                    walk(arg, first, deep | {(t.sym, a)}, var_dep, const_mats, const_syms)

        self.rule_var_dep: list[dict[Var, tuple[frozenset[int], ...]]] = []
        self.rule_const_dep: list[tuple[frozenset[int], ...]] = []
        for r, _ in self.rules:
            var_dep: dict[Var, list[set[int]]] = {}
            const_mats: list[set[int]] = [set() for _ in range(d)]
            const_syms: set[Symbol] = set()
            walk(r.lhs, None, frozenset(), var_dep, const_mats, const_syms)
            walk(r.rhs, None, frozenset(), var_dep, const_mats, const_syms)
            const_cells: set[int] = set()
            for s in const_syms:
                const_cells.update(const_ids.get(s, ()))
            self.rule_var_dep.append(
                {v: tuple(frozenset(ks) for ks in per) for v, per in var_dep.items()}
            )
            self.rule_const_dep.append(
                tuple(frozenset(const_mats[k] | const_cells) for k in range(d))
            )
        self.scope_slots: frozenset[int] = frozenset(
            i
            for i, slot in enumerate(self.slots)
            if slot.kind == "mat" and slot.sym in (self.p.degree_scope or ())
        )

        # propagation state: where each matrix cell's slot lives, the hop
        # sequences from a rule side's root down to each variable, a trail of
        # interval tightenings for backtracking, and per-slot cause sets
        # recording which assignments the current bounds derive from
        self.cell_slot: dict[tuple[Symbol, int, int, int], int] = {}
        self.const_slot: dict[tuple[Symbol, int], int] = {}
        for i, slot in enumerate(self.slots):
            if slot.kind == "mat":
                self.cell_slot[(slot.sym, slot.arg, slot.row, slot.col)] = i
            else:
                self.const_slot[(slot.sym, slot.row)] = i

        def var_paths(t: Term, hops: tuple, acc: dict, side: int) -> None:
            if isinstance(t, Var):
                acc.setdefault(t, ([], []))[side].append(hops)
                return
            for a, arg in enumerate(t.args):
                var_paths(arg, hops + ((t.sym, a),), acc, side)

        self.rule_var_paths: list[dict[Var, tuple[list, list]]] = []
        for r, _ in self.rules:
            acc: dict[Var, tuple[list, list]] = {}
            var_paths(r.lhs, (), acc, 0)
            var_paths(r.rhs, (), acc, 1)
            self.rule_var_paths.append(acc)

        def const_paths(t: Term, hops: tuple, acc: dict, side: int) -> None:
            if isinstance(t, Var):
                return
            acc.setdefault(t.sym, ([], []))[side].append(hops)
            for a, arg in enumerate(t.args):
                const_paths(arg, hops + ((t.sym, a),), acc, side)

        self.rule_const_paths: list[dict[Symbol, tuple[list, list]]] = []
        for r, _ in self.rules:
            acc2: dict[Symbol, tuple[list, list]] = {}
            const_paths(r.lhs, (), acc2, 0)
            const_paths(r.rhs, (), acc2, 1)
            self.rule_const_paths.append(acc2)

        self.trail: list[tuple[int, int, int, frozenset]] = []
        self.cell_cause: list[frozenset] = [frozenset()] * len(self.slots)

    def _init_symbol(self, sym: Symbol, mono: set[int]) -> None:
        d, bound = self.dim, self.p.coeff_bound
        mbound = bound if self.p.mat_bound is None else min(bound, self.p.mat_bound)
        shape = self.shapes[sym]
        mlo = [[[0] * d for _ in range(d)] for _ in range(sym.arity)]
        mhi = [[[0] * d for _ in range(d)] for _ in range(sym.arity)]
        for a in range(sym.arity):
            for r in range(d):
                for c in range(d):
                    if shape == "unit":
                        lo = hi = 1 if r == c else 0
                    elif shape == "ones":
                        lo = hi = 1
                    elif shape == "triangular":
                        if r > c:
                            lo = hi = 0
                        elif r == c:
                            lo, hi = 0, 1
                        else:
                            lo, hi = 0, mbound
                    else:
                        lo, hi = 0, mbound
                    if (a + 1) in mono and r == 0 and c == 0:
                        lo = max(lo, 1)
                    if lo > hi:
                        self.infeasible = True
                        return
                    mlo[a][r][c], mhi[a][r][c] = lo, hi
                    if lo < hi:
                        self.slots.append(_Slot(sym, "mat", a, r, c, lo, hi))
        clo = [0] * d
        chi = [bound] * d
        for r in range(d):
            self.slots.append(_Slot(sym, "const", 0, r, 0, 0, bound))
        self.mats_lo[sym], self.mats_hi[sym] = mlo, mhi
        self.const_lo[sym], self.const_hi[sym] = clo, chi

    def _bounds(self, i: int) -> tuple[int, int]:
        s = self.slots[i]
        if s.kind == "mat":
            return (
                self.mats_lo[s.sym][s.arg][s.row][s.col],
                self.mats_hi[s.sym][s.arg][s.row][s.col],
            )
        return (self.const_lo[s.sym][s.row], self.const_hi[s.sym][s.row])

    def _tighten(self, i: int, lo: int, hi: int, cause: frozenset) -> None:
        s = self.slots[i]
        old_lo, old_hi = self._bounds(i)
        self.trail.append((i, old_lo, old_hi, self.cell_cause[i]))
        if s.kind == "mat":
            self.mats_lo[s.sym][s.arg][s.row][s.col] = lo
            self.mats_hi[s.sym][s.arg][s.row][s.col] = hi
        else:
            self.const_lo[s.sym][s.row] = lo
            self.const_hi[s.sym][s.row] = hi
        self.cell_cause[i] = cause

    def _assign(self, idx: int, v: int) -> None:
        self._tighten(idx, v, v, frozenset((idx,)))

    def _undo_to(self, mark: int) -> None:
        # roll back assignments and every tightening propagated from them
        while len(self.trail) > mark:
            i, lo, hi, cause = self.trail.pop()
            s = self.slots[i]
            if s.kind == "mat":
                self.mats_lo[s.sym][s.arg][s.row][s.col] = lo
                self.mats_hi[s.sym][s.arg][s.row][s.col] = hi
            else:
                self.const_lo[s.sym][s.row] = lo
                self.const_hi[s.sym][s.row] = hi
            self.cell_cause[i] = cause

    def _const_margin(self, lconst: dict, rconst: dict) -> tuple:
        """Largest achievable value of (lhs - rhs) constant part, per
        coordinate, over all constant vectors still inside their bounds."""
        d = self.dim
        margin = [0] * d
        for sym in lconst.keys() | rconst.keys():
            lhi = lconst.get(sym, (None, None))[1]
            rlo = rconst.get(sym, (None, None))[0]
            clo, chi = self.const_lo[sym], self.const_hi[sym]
            for k in range(d):
                acc = 0
                for j in range(d):
                    top = (lhi[k][j] if lhi else 0) - (rlo[k][j] if rlo else 0)
                    acc += top * chi[j] if top >= 0 else top * clo[j]
                margin[k] += acc
        return tuple(margin)

    def _dep_cause(self, cells) -> set[int]:
        """Assignments responsible for the current bounds of these cells.

        An assigned slot's cause is itself, a propagated slot carries the
        assignments its bounds were derived from, an untouched slot
        contributes nothing."""
        out: set[int] = set()
        for c in cells:
            out |= self.cell_cause[c]
        return out

    def _path_bounds(self, path) -> tuple:
        # single-hop results alias the live interval state: read only
        if not path:
            ident = identity_matrix(self.dim)
            return ident, ident
        s, a = path[0]
        plo, phi = self.mats_lo[s][a], self.mats_hi[s][a]
        for s, a in path[1:]:
            plo = mat_mul(plo, self.mats_lo[s][a])
            phi = mat_mul(phi, self.mats_hi[s][a])
        return plo, phi

    def _revise_var(self, ridx: int, v: Var, lpaths, rpaths, touched: set) -> set[int] | None:
        """One variable's domination constraint: the summed coefficient of v
        on the right must be entrywise coverable by the left. Checks the
        interval bracket, then solves every path with exactly one
        undetermined factor for that factor's cells, tightening them."""
        d = self.dim
        lb = [self._path_bounds(p) for p in lpaths]
        rb = [self._path_bounds(p) for p in rpaths]
        if len(lb) == 1:
            lhi = lb[0][1]
        else:
            lhi = [[sum(b[1][k][j] for b in lb) for j in range(d)] for k in range(d)]
        if len(rb) == 1:
            rlo = rb[0][0]
        else:
            rlo = [[sum(b[0][k][j] for b in rb) for j in range(d)] for k in range(d)]
        dep = self.rule_var_dep[ridx][v]
        for k in range(d):
            for j in range(d):
                if rlo[k][j] > lhi[k][j]:
                    return self._dep_cause(dep[k])

        def split(path):
            # usable only when exactly one factor still has undetermined cells
            fidx = None
            for m, (s, a) in enumerate(path):
                if self.mats_lo[s][a] != self.mats_hi[s][a]:
                    if fidx is not None:
                        return None
                    fidx = m
            if fidx is None:
                return None
            pre = identity_matrix(d)
            for s, a in path[:fidx]:
                pre = mat_mul(pre, self.mats_lo[s][a])
            post = identity_matrix(d)
            for s, a in path[fidx + 1:]:
                post = mat_mul(post, self.mats_lo[s][a])
            return path[fidx], pre, post

        for paths, bounds, upper in ((rpaths, rb, True), (lpaths, lb, False)):
            for p, (plo, phi) in zip(paths, bounds):
                parts = split(p)
                if parts is None:
                    continue
                (fsym, farg), pre, post = parts
                flo = self.mats_lo[fsym][farg]
                fhi = self.mats_hi[fsym][farg]
                for k in range(d):
                    for j in range(d):
                        if upper:
                            # this path may use at most what the left can
                            # still cover after the other right paths
                            room = lhi[k][j] - (rlo[k][j] - plo[k][j])
                        else:
                            # this path must supply what the right demands
                            # beyond what the other left paths can give
                            room = rlo[k][j] - (lhi[k][j] - phi[k][j])
                        for a in range(d):
                            ca = pre[k][a]
                            if ca == 0:
                                continue
                            for b in range(d):
                                coef = ca * post[b][j]
                                if coef == 0:
                                    continue
                                i = self.cell_slot.get((fsym, farg, a, b))
                                if i is None:
                                    continue
                                if upper:
                                    rest = plo[k][j] - coef * flo[a][b]
                                    new_hi = (room - rest) // coef
                                    if new_hi >= fhi[a][b]:
                                        continue
                                    cause = self.cell_cause[i] | self._dep_cause(dep[k])
                                    if new_hi < flo[a][b]:
                                        return cause
                                    self._tighten(i, flo[a][b], new_hi, frozenset(cause))
                                else:
                                    rest = phi[k][j] - coef * fhi[a][b]
                                    new_lo = -((rest - room) // coef)
                                    if new_lo <= flo[a][b]:
                                        continue
                                    cause = self.cell_cause[i] | self._dep_cause(dep[k])
                                    if new_lo > fhi[a][b]:
                                        return cause
                                    self._tighten(i, new_lo, fhi[a][b], frozenset(cause))
                                touched.add(fsym)
        return None

    def _propagate(self, seeds) -> set[int] | None:
        """Run domination and margin revisions to a fixpoint starting from
        the given rule indices. Returns a conflict cause, or None."""
        work = deque(seeds)
        queued = set(work)
        while work:
            ridx = work.popleft()
            queued.discard(ridx)
            touched: set[Symbol] = set()
            for v, (lp, rp) in self.rule_var_paths[ridx].items():
                cause = self._revise_var(ridx, v, lp, rp, touched)
                if cause is not None:
                    return cause
            cause = self._revise_margin(ridx, touched)
            if cause is not None:
                return cause
            for s in touched:
                for r2 in self.rules_of[s]:
                    if r2 not in queued:
                        queued.add(r2)
                        work.append(r2)
        return None

    def _const_coeffs(self, ridx: int) -> tuple[dict, dict]:
        """Interval coefficient of each symbol's constant vector in the
        linear form of the rule's sides."""
        lout: dict[Symbol, tuple] = {}
        rout: dict[Symbol, tuple] = {}
        for sym, (lp, rp) in self.rule_const_paths[ridx].items():
            for paths, out in ((lp, lout), (rp, rout)):
                if not paths:
                    continue
                lo = hi = None
                for p in paths:
                    plo, phi = self._path_bounds(p)
                    lo = plo if lo is None else mat_add(lo, plo)
                    hi = phi if hi is None else mat_add(hi, phi)
                out[sym] = (lo, hi)
        return lout, rout

    def _revise_margin(self, idx: int, touched: set) -> set[int] | None:
        """Check that the constant parts can still give this rule its strict
        or weak decrease, and tighten constant cells whose coefficient in
        the margin is already determined. The margin is linear in the
        constant vectors, so once the matrices along a symbol's paths are
        pinned its cells can be bounded directly."""
        rule, kind = self.rules[idx]
        if kind == "gap":
            return None
        d = self.dim
        lconst, rconst = self._const_coeffs(idx)
        margin = self._const_margin(lconst, rconst)
        for k in range(d):
            need = 1 if kind == "strict" and k == 0 else 0
            if margin[k] < need:
                return self._dep_cause(self.rule_const_dep[idx][k])
            dep_k: set[int] | None = None
            for sym in lconst.keys() | rconst.keys():
                llo, lhi = lconst.get(sym, (None, None))
                rlo, rhi = rconst.get(sym, (None, None))
                if llo != lhi or rlo != rhi:
                    continue  # coefficient still undetermined, no revision
                clo, chi = self.const_lo[sym], self.const_hi[sym]
                for j in range(d):
                    top = (lhi[k][j] if lhi else 0) - (rlo[k][j] if rlo else 0)
                    if top == 0:
                        continue
                    best = top * chi[j] if top > 0 else top * clo[j]
                    rest = margin[k] - best
                    i = self.const_slot[(sym, j)]
                    if top > 0:
                        new_lo = -((rest - need) // top)
                        if new_lo <= clo[j]:
                            continue
                    else:
                        new_hi = (rest - need) // (-top)
                        if new_hi >= chi[j]:
                            continue
                    if dep_k is None:
                        dep_k = self._dep_cause(self.rule_const_dep[idx][k])
                    cause = self.cell_cause[i] | dep_k
                    if top > 0:
                        if new_lo > chi[j]:
                            return cause
                        self._tighten(i, new_lo, chi[j], frozenset(cause))
                    else:
                        if new_hi < clo[j]:
                            return cause
                        self._tighten(i, clo[j], new_hi, frozenset(cause))
                    touched.add(sym)
        return None

    def _degree_possible(self) -> bool:
        cap = self.p.degree_cap
        if cap is None:
            return True
        d = self.dim
        m = [[0] * d for _ in range(d)]
        for sym in self.p.degree_scope or ():
            if sym not in self.mats_lo:
                continue
            for mat in self.mats_lo[sym]:
                for r in range(d):
                    row = mat[r]
                    for c in range(d):
                        if row[c] > m[r][c]:
                            m[r][c] = row[c]
        ones = sum(1 for r in range(d) if m[r][r] >= 1)
        if ones <= cap:
            return True
        # completion to exactly the identity would still give degree 1
        off = any(m[r][c] > 0 for r in range(d) for c in range(d) if r != c)
        return not off

    def _conflict(self, idx: int) -> set[int] | None:
        """Recheck everything the slot at idx can influence.

        Propagates the domination constraints from the rules mentioning the
        touched symbol, then rechecks their constant margins and the degree.
        Returns None when all checks pass, otherwise the assignments
        implicated in the first failure."""
        sym = self.slots[idx].sym
        cause = self._propagate(self.rules_of[sym])
        if cause is None and self.slots[idx].kind == "mat":
            scope = self.p.degree_scope
            if scope is not None and sym in scope and not self._degree_possible():
                cause = self._dep_cause(self.scope_slots)
        if cause is None:
            return None
        return {i for i in cause if i < idx}

    def _domain(self, idx: int) -> list[int]:
        """Value order for a slot, within its possibly tightened bounds.
        Diagonal coefficient cells try 1 before 0: witnesses tend to carry
        an identity-like backbone, and a degenerate zero diagonal is usually
        refuted only after a deep search."""
        s = self.slots[idx]
        lo, hi = self._bounds(idx)
        values = list(range(lo, hi + 1))
        if s.kind == "mat" and s.row == s.col and lo == 0 and hi >= 1:
            values[0], values[1] = values[1], values[0]
        return values

    def _build(self) -> MatrixInterpretation:
        assign = {}
        for sym in self.symbols:
            mats = tuple(
                tuple(tuple(row) for row in self.mats_lo[sym][a])
                for a in range(sym.arity)
            )
            const = tuple(self.const_lo[sym])
            assign[sym] = LinearFunc(mats, const)
        return MatrixInterpretation(self.dim, assign)

    def _verify(self, cand: MatrixInterpretation) -> bool:
        p = self.p
        if not orients_all(cand, p.strict, p.weak):
            return False
        if self.mu_local and not is_mu_monotone(cand, self.mu_local):
            return False
        if p.gap and weight_gap_delta(cand, p.gap) is None:
            return False
        ident = identity_matrix(self.dim)
        for sym, shape in self.shapes.items():
            f = cand.assign[sym]
            if shape == "triangular" and not is_triangular_on(cand, [sym]):
                return False
            if shape == "unit" and any(m != ident for m in f.mats):
                return False
            if shape == "ones" and any(m != ((1,),) for m in f.mats):
                return False
        if p.degree_cap is not None:
            try:
                if degree(cand, p.degree_scope) > p.degree_cap:
                    return False
            except ValueError:
                return False
        return True

    def run(self) -> SearchOutcome:
        start = time.monotonic()
        if self.infeasible:
            return SearchOutcome(None, 0, 0, time.monotonic() - start, True)
        candidates = 0
        # with full domains an impossible rule proves emptiness outright;
        # the initial propagation also pins every forced cell before the
        # first decision is made
        if self._propagate(range(len(self.rules))) is not None:
            return SearchOutcome(None, 0, 0, time.monotonic() - start, True)
        if not self.slots:
            cand = self._build()
            found = cand if self._verify(cand) else None
            return SearchOutcome(found, 0, 1, time.monotonic() - start, True)
        total = len(self.slots)
        stack: list = [iter(self._domain(0))]
        confl: list[set[int]] = [set()]
        tmarks: list[int] = [len(self.trail)]
        while stack:
            depth = len(stack) - 1
            v = next(stack[-1], None)
            if v is None:
                stack.pop()
                cause = confl.pop()
                self._undo_to(tmarks.pop())
                if not cause:
                    # every value failed independently of earlier slots
                    return SearchOutcome(
                        None, self.budget.nodes, candidates, time.monotonic() - start, True
                    )
                back = max(cause)
                cause.discard(back)
                while len(stack) - 1 > back:
                    stack.pop()
                    confl.pop()
                    self._undo_to(tmarks.pop())
                confl[back] |= cause
                continue
            if not self.budget.step():
                return SearchOutcome(
                    None, self.budget.nodes, candidates, time.monotonic() - start, False
                )
            self._undo_to(tmarks[depth])
            self._assign(depth, v)
            cause = self._conflict(depth)
            if cause is not None:
                confl[depth] |= cause
                continue
            if depth + 1 == total:
                candidates += 1
                cand = self._build()
                if self._verify(cand):
                    return SearchOutcome(
                        cand, self.budget.nodes, candidates, time.monotonic() - start, True
                    )
                # rejected by full verification: no constraint to blame
                confl[depth].update(range(depth))
                continue
            stack.append(iter(self._domain(depth + 1)))
            confl.append(set())
            tmarks.append(len(self.trail))
        return SearchOutcome(
            None, self.budget.nodes, candidates, time.monotonic() - start, not self.budget.stopped
        )


def search_interpretation(problem: SearchProblem, budget: Budget | None = None) -> SearchOutcome:
    """Find an interpretation satisfying the problem, or report exhaustion.

    Runs in two stages when the coefficient bound exceeds 1: matrix cells
    capped at 1 first, then the full bound. Most witnesses have a 0/1
    coefficient skeleton, and the small stage is orders of magnitude cheaper
    than the full one. The stages share the node budget; completeness is
    judged on the full space."""
    if budget is None:
        budget = Budget()
    if problem.coeff_bound > 1 and problem.mat_bound is None:
        small = replace(problem, mat_bound=1)
        first = _Search(small, budget).run()
        if first.found is not None:
            return first
        second = _Search(problem, budget).run()
        return replace(
            second,
            candidates=first.candidates + second.candidates,
            elapsed=first.elapsed + second.elapsed,
        )
    return _Search(problem, budget).run()
