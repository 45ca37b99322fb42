"""Matrix interpretations over vectors of naturals.

A symbol of arity n is assigned n square coefficient matrices and a constant
vector; terms then denote linear functions of their variables. The strict
order compares first components and requires the rest not to shrink, which
keeps it compatible with adding contexts whose top-left entries are 1.

Orientation is checked by absolute positiveness on the symbolic linear
forms: coefficient matrices must dominate entrywise and the constant parts
must satisfy the strict or weak vector comparison. That is sufficient for
the order to hold under every assignment and is exactly the certificate
condition re-checked here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .terms import App, Symbol, Term, Var
from .trs import Rule

Vec = tuple[int, ...]
Mat = tuple[tuple[int, ...], ...]


def zero_vector(dim: int) -> Vec:
    return (0,) * dim

def zero_matrix(dim: int) -> Mat:
    return ((0,) * dim,) * dim

@lru_cache(maxsize=None)
def identity_matrix(dim: int) -> Mat:
    return tuple(tuple(1 if r == c else 0 for c in range(dim)) for r in range(dim))

def vec_add(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))

def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))

def mat_mul(a: Mat, b: Mat) -> Mat:
    cols = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)

def mat_vec(a: Mat, v: Vec) -> Vec:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)

def mat_leq(a: Mat, b: Mat) -> bool:
    """Entrywise a <= b."""
    return all(x <= y for ra, rb in zip(a, b) for x, y in zip(ra, rb))

def mat_max(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(max(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def vec_geq(u: Vec, v: Vec) -> bool:
    return all(a >= b for a, b in zip(u, v))


def vec_greater(u: Vec, v: Vec) -> bool:
    """First component strictly above, the rest at least as large."""
    return u[0] > v[0] and all(a >= b for a, b in zip(u[1:], v[1:]))


@dataclass(frozen=True)
class LinearFunc:
    """Coefficient matrices per argument plus a constant vector."""

    mats: tuple[Mat, ...]
    const: Vec

    @property
    def dim(self) -> int:
        return len(self.const)


@dataclass
class MatrixInterpretation:
    dim: int
    assign: dict[Symbol, LinearFunc]

    def func(self, sym: Symbol) -> LinearFunc:
        try:
            return self.assign[sym]
        except KeyError:
            raise KeyError(f"no interpretation for {sym.name}/{sym.arity}") from None


def evaluate(interp: MatrixInterpretation, t: Term, alpha: Mapping[Var, Vec] | None = None) -> Vec:
    """Value of t; unassigned variables default to the zero vector."""
    zero = zero_vector(interp.dim)

    def val(node: Term) -> Vec:
        if isinstance(node, Var):
            if alpha is None:
                return zero
            return alpha.get(node, zero)
        f = interp.func(node.sym)
        acc = f.const
        for m, arg in zip(f.mats, node.args):
            acc = vec_add(acc, mat_vec(m, val(arg)))
        return acc

    return val(t)


@dataclass(frozen=True)
class LinearForm:
    """Symbolic value of a term: a matrix per variable and a constant."""

    coeffs: tuple[tuple[Var, Mat], ...]
    const: Vec

    def coeff(self, v: Var, dim: int) -> Mat:
        for w, m in self.coeffs:
            if w is v:
                return m
        return zero_matrix(dim)

    @property
    def variables(self) -> tuple[Var, ...]:
        return tuple(v for v, _ in self.coeffs)


def linear_form(interp: MatrixInterpretation, t: Term) -> LinearForm:
    dim = interp.dim

    def form(node: Term) -> tuple[dict[Var, Mat], Vec]:
        if isinstance(node, Var):
            return {node: identity_matrix(dim)}, zero_vector(dim)
        f = interp.func(node.sym)
        coeffs: dict[Var, Mat] = {}
        const = f.const
        for m, arg in zip(f.mats, node.args):
            sub_coeffs, sub_const = form(arg)
            const = vec_add(const, mat_vec(m, sub_const))
            for v, c in sub_coeffs.items():
                prod = mat_mul(m, c)
                coeffs[v] = mat_add(coeffs[v], prod) if v in coeffs else prod
        return coeffs, const

    coeffs, const = form(t)
    return LinearForm(tuple(coeffs.items()), const)


def _orients(interp: MatrixInterpretation, rule: Rule, strict: bool) -> bool:
    left = linear_form(interp, rule.lhs)
    right = linear_form(interp, rule.rhs)
    dim = interp.dim
    for v, rc in right.coeffs:
        if not mat_leq(rc, left.coeff(v, dim)):
            return False
    lc, rc = left.const, right.const
    if strict:
        return lc[0] >= rc[0] + 1 and vec_geq(lc[1:], rc[1:])
    return vec_geq(lc, rc)


def orients_strictly(interp: MatrixInterpretation, rule: Rule) -> bool:
    return _orients(interp, rule, strict=True)


def orients_weakly(interp: MatrixInterpretation, rule: Rule) -> bool:
    return _orients(interp, rule, strict=False)


def orients_all(
    interp: MatrixInterpretation,
    strict: Iterable[Rule],
    weak: Iterable[Rule] = (),
) -> bool:
    return all(orients_strictly(interp, r) for r in strict) and all(
        orients_weakly(interp, r) for r in weak
    )


def is_mu_monotone(interp: MatrixInterpretation, mu: Iterable[tuple[Symbol, int]]) -> bool:
    """Rewriting below a replacing argument must not drop the first component:
    the argument's matrix needs a top-left entry of at least 1."""
    for sym, i in mu:
        f = interp.assign.get(sym)
        if f is None or f.mats[i - 1][0][0] < 1:
            return False
    return True


def is_triangular_matrix(m: Mat) -> bool:
    """Upper triangular with diagonal entries at most 1."""
    for r, row in enumerate(m):
        if row[r] > 1:
            return False
        if any(row[c] != 0 for c in range(r)):
            return False
    return True


def is_triangular_on(interp: MatrixInterpretation, scope: Iterable[Symbol]) -> bool:
    for sym in scope:
        f = interp.assign.get(sym)
        if f is None:
            continue
        if not all(is_triangular_matrix(m) for m in f.mats):
            return False
    return True


def is_triangular(interp: MatrixInterpretation) -> bool:
    return is_triangular_on(interp, interp.assign.keys())


def is_constructor_restricted(interp: MatrixInterpretation, constructors: Iterable[Symbol]) -> bool:
    """Triangularity is only imposed on the constructor part of the signature."""
    return is_triangular_on(interp, constructors)


def is_strongly_linear(interp: MatrixInterpretation) -> bool:
    """Dimension 1 with every coefficient exactly 1."""
    if interp.dim != 1:
        return False
    return all(m == ((1,),) for f in interp.assign.values() for m in f.mats)


def is_unit_coefficient(interp: MatrixInterpretation) -> bool:
    """Every argument coefficient is the identity matrix (any dimension)."""
    ident = identity_matrix(interp.dim)
    return all(m == ident for f in interp.assign.values() for m in f.mats)


def is_adequate(interp: MatrixInterpretation, compounds: Iterable[Symbol]) -> bool:
    """Compound symbols must carry identity coefficients so that grouped
    positions contribute additively and stay monotone."""
    ident = identity_matrix(interp.dim)
    for sym in compounds:
        f = interp.assign.get(sym)
        if f is None or any(m != ident for m in f.mats):
            return False
    return True


def degree(interp: MatrixInterpretation, scope: Iterable[Symbol] | None = None) -> int:
    """Polynomial growth degree read off the entrywise max matrix.

    With a scope (the restricted part of the signature) a max matrix equal
    to the identity gives degree 1: values then grow at most linearly in
    term size even before counting the unrestricted symbols.
    """
    if scope is None:
        funcs = list(interp.assign.values())
    else:
        funcs = [interp.assign[s] for s in scope if s in interp.assign]
    m = zero_matrix(interp.dim)
    for f in funcs:
        for mat in f.mats:
            if not is_triangular_matrix(mat):
                raise ValueError("degree undefined for non-triangular scope")
            m = mat_max(m, mat)
    if scope is not None and m == identity_matrix(interp.dim):
        return 1
    return sum(1 for r in range(interp.dim) if m[r][r] == 1)


def trunc_sub(a: int, b: int) -> int:
    return a - b if a > b else 0


def weight_gap_delta(interp: MatrixInterpretation, pairs: Iterable[Rule]) -> int | None:
    """Largest possible first-component increase across the given steps.

    Defined only when every rhs variable coefficient is dominated entrywise
    by the lhs one; then the increase is bounded by the constant parts alone
    and the truncated difference of first components is the gap.
    """
    dim = interp.dim
    delta = 0
    for pair in pairs:
        left = linear_form(interp, pair.lhs)
        right = linear_form(interp, pair.rhs)
        for v, rc in right.coeffs:
            if not mat_leq(rc, left.coeff(v, dim)):
                return None
        delta = max(delta, trunc_sub(right.const[0], left.const[0]))
    return delta


def nonduplicating_slmi_gap(interp: MatrixInterpretation, rules: Iterable[Rule]) -> int | None:
    """Gap for a strongly linear interpretation on a non-duplicating system.

    Variable counts cannot grow, and unit coefficients make every variable
    contribute identically on both sides, so the constant parts bound the
    increase without any domination side condition.
    """
    if not is_strongly_linear(interp):
        return None
    rules = tuple(rules)
    if any(r.is_duplicating() for r in rules):
        return None
    delta = 0
    for rule in rules:
        left = linear_form(interp, rule.lhs)
        right = linear_form(interp, rule.rhs)
        delta = max(delta, trunc_sub(right.const[0], left.const[0]))
    return delta


def _format_vec(v: Vec) -> str:
    return "[" + ",".join(str(x) for x in v) + "]"


def _format_mat(m: Mat) -> str:
    return "[" + ",".join(_format_vec(row) for row in m) + "]"


def format_interpretation(interp: MatrixInterpretation, name: str = "") -> str:
    """One line per symbol: f_A(x1,x2) = M1*x1 + M2*x2 + [c1,c2]."""
    suffix = f"_{name}" if name else ""
    lines = []
    for sym in sorted(interp.assign, key=lambda s: (s.name, s.arity)):
        f = interp.assign[sym]
        args = ",".join(f"x{i + 1}" for i in range(sym.arity))
        parts = [f"{_format_mat(m)}*x{i + 1}" for i, m in enumerate(f.mats)]
        parts.append(_format_vec(f.const))
        lines.append(f"{sym.name}{suffix}({args}) = " + " + ".join(parts))
    return "\n".join(lines)


def interp_to_json(interp: MatrixInterpretation) -> dict:
    return {
        "dim": interp.dim,
        "symbols": {
            f"{sym.name}/{sym.arity}": {
                "mats": [[list(row) for row in m] for m in f.mats],
                "const": list(f.const),
            }
            for sym, f in sorted(
                interp.assign.items(), key=lambda kv: (kv[0].name, kv[0].arity)
            )
        },
    }


def interp_from_json(data: dict) -> MatrixInterpretation:
    dim = int(data["dim"])
    assign: dict[Symbol, LinearFunc] = {}
    for key, spec in data["symbols"].items():
        name, _, arity = key.rpartition("/")
        sym = Symbol(name, int(arity))
        mats = tuple(tuple(tuple(int(x) for x in row) for row in m) for m in spec["mats"])
        const = tuple(int(x) for x in spec["const"])
        if len(mats) != sym.arity or len(const) != dim:
            raise ValueError(f"malformed interpretation entry for {key}")
        if any(len(m) != dim or any(len(row) != dim for row in m) for m in mats):
            raise ValueError(f"malformed interpretation entry for {key}")
        assign[sym] = LinearFunc(mats, const)
    return MatrixInterpretation(dim, assign)
