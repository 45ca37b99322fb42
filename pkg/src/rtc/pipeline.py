"""End-to-end analysis strategies and verifiable certificates.

Three routes, tried in order of increasing machinery:

  direct   one restricted interpretation orients every rule strictly.
  wdp      the weak (innermost) dependency pairs plus their usable rules
           are oriented at once, or split into a pair part and a weight-gap
           part whose interpretations are combined additively.
  wdg      the congruence classes of the dependency graph are handled per
           source path: a gap interpretation for the whole path system and
           one interpretation per class that orients it strictly while the
           earlier classes stay weakly oriented.

Every successful route yields a Certificate carrying the interpretations
found; check_certificate recomputes the transformations from the input
system and re-verifies all claims without trusting the search.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable

from .deppairs import (
    DpProblem,
    usable_rules,
    weak_dependency_pairs,
    weak_innermost_dependency_pairs,
)
from .graphs import CongruenceGraph, congruence_graph, maximal_source_paths
from .interp import (
    LinearFunc,
    MatrixInterpretation,
    degree,
    interp_from_json,
    interp_to_json,
    is_adequate,
    is_mu_monotone,
    is_triangular_on,
    nonduplicating_slmi_gap,
    orients_all,
    weight_gap_delta,
    zero_matrix,
    zero_vector,
)
from .replacement import ReplacementMap, innermost_usable_map, usable_map
from .search import Budget, SearchProblem, search_interpretation
from .terms import Symbol, funs_of
from .trs import TRS, Rule, fingerprint


@dataclass
class AnalysisOptions:
    mode: str | None = None
    max_dim: int = 2
    coeff_bound: int = 3
    degree_cap: int | None = None
    search_nodes: int = 200_000
    timeout: float | None = 60.0
    strategies: tuple[str, ...] = ("direct", "wdp", "wdg")


@dataclass
class Certificate:
    fingerprint: str
    mode: str
    strategy: str
    degree: int
    evidence: dict

    def to_json(self) -> str:
        payload = {
            "fingerprint": self.fingerprint,
            "mode": self.mode,
            "strategy": self.strategy,
            "degree": self.degree,
            "evidence": self.evidence,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "Certificate":
        data = json.loads(text)
        return Certificate(
            fingerprint=str(data["fingerprint"]),
            mode=str(data["mode"]),
            strategy=str(data["strategy"]),
            degree=int(data["degree"]),
            evidence=dict(data["evidence"]),
        )


def verdict_line(cert: Certificate | None) -> str:
    if cert is None:
        return "MAYBE"
    return f"YES(?,O(n^{cert.degree}))"


def _mu_for(rules: Iterable[Rule], mode: str) -> ReplacementMap:
    rules = tuple(rules)
    if mode == "innermost":
        return innermost_usable_map(rules)
    return usable_map(rules)


def _dp_for(trs: TRS, mode: str) -> DpProblem:
    if mode == "innermost":
        return weak_innermost_dependency_pairs(trs)
    return weak_dependency_pairs(trs)


def _system_split(rules: Iterable[Rule]) -> tuple[frozenset[Symbol], frozenset[Symbol]]:
    rules = tuple(rules)
    defined = frozenset(r.root for r in rules)
    occurring: set[Symbol] = set()
    for r in rules:
        occurring |= funs_of(r.lhs) | funs_of(r.rhs)
    return defined, frozenset(occurring - defined)


def _mu_json(mu: ReplacementMap) -> list:
    return sorted([s.name, s.arity, i] for s, i in mu)

def _mu_from_json(data: list) -> ReplacementMap:
    return frozenset((Symbol(name, int(ar)), int(i)) for name, ar, i in data)


def _complete_zero(interp: MatrixInterpretation, symbols: Iterable[Symbol]) -> MatrixInterpretation:
    """Give symbols absent from the rules the zero function; this keeps
    evaluation total on basic terms without affecting orientation or degree."""
    d = interp.dim
    assign = dict(interp.assign)
    for sym in symbols:
        if sym not in assign:
            assign[sym] = LinearFunc((zero_matrix(d),) * sym.arity, zero_vector(d))
    return MatrixInterpretation(d, assign)


def _deadline_passed(deadline: float | None) -> bool:
    return deadline is not None and time.monotonic() > deadline


def _find(
    opts: AnalysisOptions,
    deadline: float | None,
    *,
    strict: tuple[Rule, ...],
    weak: tuple[Rule, ...] = (),
    gap: tuple[Rule, ...] = (),
    mu: ReplacementMap,
    shapes: dict[Symbol, str],
    scope: frozenset[Symbol],
    dims: Iterable[int] | None = None,
) -> MatrixInterpretation | None:
    for d in dims if dims is not None else range(1, opts.max_dim + 1):
        if _deadline_passed(deadline):
            return None
        problem = SearchProblem(
            dim=d,
            coeff_bound=opts.coeff_bound,
            strict=strict,
            weak=weak,
            gap=gap,
            mu=mu,
            shapes=shapes,
            degree_cap=opts.degree_cap,
            degree_scope=scope,
        )
        outcome = search_interpretation(problem, Budget(opts.search_nodes, deadline))
        if outcome.found is not None:
            return outcome.found
    return None


def analyze_direct(trs: TRS, mode: str, opts: AnalysisOptions, deadline: float | None) -> Certificate | None:
    mu = _mu_for(trs.rules, mode)
    shapes = {c: "triangular" for c in trs.constructors}
    scope = trs.constructors
    found = _find(opts, deadline, strict=trs.rules, mu=mu, shapes=shapes, scope=scope)
    if found is None:
        return None
    found = _complete_zero(found, trs.constructors)
    deg = degree(found, scope)
    evidence = {"mu": _mu_json(mu), "interpretation": interp_to_json(found)}
    return Certificate(fingerprint(trs), mode, "direct", deg, evidence)


def _wdp_parts(trs: TRS, mode: str):
    dp = _dp_for(trs, mode)
    uidx = usable_rules(dp.pairs, trs)
    urules = tuple(trs.rules[i - 1] for i in uidx)
    system = dp.pairs + urules
    _, constructors = _system_split(system)
    mu = _mu_for(system, mode)
    return dp, uidx, urules, system, constructors, mu


def _shaped(constructors: frozenset[Symbol], compounds: Iterable[Symbol]) -> dict[Symbol, str]:
    shapes = {c: "triangular" for c in constructors}
    for c in compounds:
        if c in shapes:
            shapes[c] = "unit"
    return shapes


def analyze_wdp(trs: TRS, mode: str, opts: AnalysisOptions, deadline: float | None) -> Certificate | None:
    dp, uidx, urules, system, constructors, mu = _wdp_parts(trs, mode)
    complete_over = constructors | trs.constructors
    base = {
        "flavor": dp.flavor,
        "mu": _mu_json(mu),
        "usable": list(uidx),
    }
    best: Certificate | None = None

    shapes1 = {c: "triangular" for c in constructors}
    found = _find(opts, deadline, strict=system, mu=mu, shapes=shapes1, scope=constructors)
    if found is not None:
        found = _complete_zero(found, complete_over)
        deg = degree(found, constructors)
        ev = dict(base, interpretation=interp_to_json(found))
        best = Certificate(fingerprint(trs), mode, "wdp-compatible", deg, ev)

    shapes2 = _shaped(constructors, dp.compounds)
    pair_part = _find(
        opts, deadline, strict=dp.pairs, weak=urules, mu=mu, shapes=shapes2, scope=constructors
    )
    if pair_part is not None:
        gap_part = _find(
            opts, deadline, strict=urules, gap=dp.pairs, mu=mu, shapes=shapes2, scope=constructors
        )
        gap_kind = "domination"
        if gap_part is None and not any(p.is_duplicating() for p in dp.pairs):
            ones = {s: "ones" for s in _occurring(system)}
            gap_part = _find(
                opts, deadline, strict=urules, mu=mu, shapes=ones, scope=constructors, dims=(1,)
            )
            gap_kind = "strongly-linear"
        if gap_part is not None:
            pair_part = _complete_zero(pair_part, complete_over)
            gap_part = _complete_zero(gap_part, complete_over)
            if gap_kind == "domination":
                delta = weight_gap_delta(gap_part, dp.pairs)
            else:
                delta = nonduplicating_slmi_gap(gap_part, dp.pairs)
            if delta is not None:
                deg = max(degree(pair_part, constructors), degree(gap_part, constructors))
                ev = dict(
                    base,
                    pair_interpretation=interp_to_json(pair_part),
                    gap_interpretation=interp_to_json(gap_part),
                    gap_kind=gap_kind,
                    delta=delta,
                )
                cand = Certificate(fingerprint(trs), mode, "wdp-weightgap", deg, ev)
                if best is None or cand.degree < best.degree:
                    best = cand
    return best


def _occurring(rules: Iterable[Rule]) -> frozenset[Symbol]:
    out: set[Symbol] = set()
    for r in rules:
        out |= funs_of(r.lhs) | funs_of(r.rhs)
    return frozenset(out)


def analyze_wdg(trs: TRS, mode: str, opts: AnalysisOptions, deadline: float | None) -> Certificate | None:
    dp = _dp_for(trs, mode)
    graph = congruence_graph(dp)
    paths = maximal_source_paths(graph)
    path_evidence = []
    overall = 0
    for path in paths:
        positions = [i for c in path for i in graph.classes[c]]
        pairs_q = tuple(dp.pairs[i] for i in positions)
        uidx = usable_rules(pairs_q, trs)
        urules = tuple(trs.rules[i - 1] for i in uidx)
        system = pairs_q + urules
        _, constructors = _system_split(system)
        mu = _mu_for(system, mode)
        shapes = _shaped(constructors, dp.compounds)
        complete_over = constructors | trs.constructors

        gap_part = _find(
            opts, deadline, strict=urules, gap=pairs_q, mu=mu, shapes=shapes, scope=constructors
        )
        gap_kind = "domination"
        if gap_part is None and not any(p.is_duplicating() for p in pairs_q):
            ones = {s: "ones" for s in _occurring(system)}
            gap_part = _find(
                opts, deadline, strict=urules, mu=mu, shapes=ones, scope=constructors, dims=(1,)
            )
            gap_kind = "strongly-linear"
        if gap_part is None:
            return None
        gap_part = _complete_zero(gap_part, complete_over)
        if gap_kind == "domination":
            delta = weight_gap_delta(gap_part, pairs_q)
        else:
            delta = nonduplicating_slmi_gap(gap_part, pairs_q)
        if delta is None:
            return None
        overall = max(overall, degree(gap_part, constructors))

        steps = []
        seen: list[Rule] = []
        for c in path:
            cls_pairs = graph.class_pairs(c)
            found = _find(
                opts,
                deadline,
                strict=cls_pairs,
                weak=tuple(seen) + urules,
                mu=mu,
                shapes=shapes,
                scope=constructors,
            )
            if found is None:
                return None
            found = _complete_zero(found, complete_over)
            overall = max(overall, degree(found, constructors))
            steps.append(
                {"class": graph.class_label(c), "interpretation": interp_to_json(found)}
            )
            seen.extend(cls_pairs)
        path_evidence.append(
            {
                "classes": [graph.class_label(c) for c in path],
                "usable": list(uidx),
                "mu": _mu_json(mu),
                "gap_kind": gap_kind,
                "delta": delta,
                "gap_interpretation": interp_to_json(gap_part),
                "steps": steps,
            }
        )
    evidence = {
        "flavor": dp.flavor,
        "classes": [graph.class_label(c) for c in range(len(graph.classes))],
        "class_edges": sorted([i, j] for i, j in graph.dag_edges),
        "paths": path_evidence,
    }
    return Certificate(fingerprint(trs), mode, "wdg", overall, evidence)


_STRATEGY_FNS: dict[str, Callable] = {
    "direct": analyze_direct,
    "wdp": analyze_wdp,
    "wdg": analyze_wdg,
}

_STRATEGY_RANK = {"direct": 0, "wdp-compatible": 1, "wdp-weightgap": 1, "wdg": 2}


def analyze(trs: TRS, mode: str | None = None, opts: AnalysisOptions | None = None) -> tuple[Certificate | None, list[str]]:
    """Run the configured strategies and keep the lowest-degree certificate.

    Ties go to the simpler strategy. The notes report skipped or failed
    strategies, including timeouts."""
    if opts is None:
        opts = AnalysisOptions()
    mode = mode or opts.mode or trs.strategy
    if mode not in ("full", "innermost"):
        raise ValueError(f"unknown mode {mode!r}")
    deadline = time.monotonic() + opts.timeout if opts.timeout is not None else None
    notes: list[str] = []
    best: Certificate | None = None
    enabled = [n for n in ("direct", "wdp", "wdg") if n in opts.strategies]
    for pos, name in enumerate(enabled):
        if _deadline_passed(deadline):
            notes.append(f"{name}: skipped, timeout reached")
            continue
        # an even share of the remaining time, so one stuck strategy
        # cannot starve the ones after it; unused time rolls over
        slice_deadline = deadline
        if deadline is not None:
            share = (deadline - time.monotonic()) / (len(enabled) - pos)
            slice_deadline = min(deadline, time.monotonic() + share)
        cert = _STRATEGY_FNS[name](trs, mode, opts, slice_deadline)
        if cert is None:
            suffix = ", timeout reached" if _deadline_passed(slice_deadline) else ""
            notes.append(f"{name}: no certificate{suffix}")
            continue
        if best is None or (cert.degree, _STRATEGY_RANK[cert.strategy]) < (
            best.degree,
            _STRATEGY_RANK[best.strategy],
        ):
            best = cert
    return best, notes


def _check_interp(
    interp: MatrixInterpretation,
    *,
    strict: tuple[Rule, ...],
    weak: tuple[Rule, ...],
    mu: ReplacementMap,
    constructors: frozenset[Symbol],
    compounds: tuple[Symbol, ...],
    msgs: list[str],
    label: str,
) -> bool:
    ok = True
    if not orients_all(interp, strict, weak):
        msgs.append(f"{label}: orientation fails")
        ok = False
    if not is_mu_monotone(interp, mu):
        msgs.append(f"{label}: not monotone on the replacement map")
        ok = False
    if not is_triangular_on(interp, constructors):
        msgs.append(f"{label}: constructor matrices not triangular")
        ok = False
    occurring_compounds = [c for c in compounds if c in interp.assign]
    if occurring_compounds and not is_adequate(interp, occurring_compounds):
        msgs.append(f"{label}: compound coefficients not identity")
        ok = False
    return ok


def check_certificate(cert: Certificate, trs: TRS) -> tuple[bool, list[str]]:
    """Re-derive every claim of the certificate from the input system."""
    msgs: list[str] = []
    if cert.fingerprint != fingerprint(trs):
        return False, ["fingerprint mismatch: certificate is for a different system"]
    if cert.mode not in ("full", "innermost"):
        return False, [f"unknown mode {cert.mode!r}"]
    ev = cert.evidence
    try:
        if cert.strategy == "direct":
            interp = interp_from_json(ev["interpretation"])
            mu = _mu_for(trs.rules, cert.mode)
            if _mu_from_json(ev["mu"]) != mu:
                msgs.append("stored replacement map differs from the recomputed one")
            ok = _check_interp(
                interp,
                strict=trs.rules,
                weak=(),
                mu=mu,
                constructors=trs.constructors,
                compounds=(),
                msgs=msgs,
                label="interpretation",
            )
            deg = degree(interp, trs.constructors)
            if deg != cert.degree:
                msgs.append(f"claimed degree {cert.degree}, recomputed {deg}")
                ok = False
            return ok and not msgs, msgs

        if cert.strategy in ("wdp-compatible", "wdp-weightgap"):
            dp, uidx, urules, system, constructors, mu = _wdp_parts(trs, cert.mode)
            if ev.get("flavor") != dp.flavor:
                msgs.append("stored pair flavor differs from the mode's")
            if list(uidx) != list(ev.get("usable", [])):
                msgs.append("stored usable rules differ from the recomputed ones")
            if _mu_from_json(ev["mu"]) != mu:
                msgs.append("stored replacement map differs from the recomputed one")
            if cert.strategy == "wdp-compatible":
                interp = interp_from_json(ev["interpretation"])
                ok = _check_interp(
                    interp,
                    strict=system,
                    weak=(),
                    mu=mu,
                    constructors=constructors,
                    compounds=(),
                    msgs=msgs,
                    label="interpretation",
                )
                deg = degree(interp, constructors)
            else:
                pair_part = interp_from_json(ev["pair_interpretation"])
                gap_part = interp_from_json(ev["gap_interpretation"])
                ok = _check_interp(
                    pair_part,
                    strict=dp.pairs,
                    weak=urules,
                    mu=mu,
                    constructors=constructors,
                    compounds=dp.compounds,
                    msgs=msgs,
                    label="pair interpretation",
                )
                ok = _check_interp(
                    gap_part,
                    strict=urules,
                    weak=(),
                    mu=mu,
                    constructors=constructors,
                    compounds=dp.compounds,
                    msgs=msgs,
                    label="gap interpretation",
                ) and ok
                if ev.get("gap_kind") == "strongly-linear":
                    delta = nonduplicating_slmi_gap(gap_part, dp.pairs)
                else:
                    delta = weight_gap_delta(gap_part, dp.pairs)
                if delta is None:
                    msgs.append("gap undefined for the stored interpretation")
                    ok = False
                elif delta != ev.get("delta"):
                    msgs.append(f"claimed gap {ev.get('delta')}, recomputed {delta}")
                    ok = False
                deg = max(degree(pair_part, constructors), degree(gap_part, constructors))
            if deg != cert.degree:
                msgs.append(f"claimed degree {cert.degree}, recomputed {deg}")
                ok = False
            return ok and not msgs, msgs

        if cert.strategy == "wdg":
            dp = _dp_for(trs, cert.mode)
            if ev.get("flavor") != dp.flavor:
                msgs.append("stored pair flavor differs from the mode's")
            graph = congruence_graph(dp)
            paths = maximal_source_paths(graph)
            stored_paths = ev.get("paths", [])
            labels = [graph.class_label(c) for c in range(len(graph.classes))]
            if labels != list(ev.get("classes", [])):
                msgs.append("stored congruence classes differ from the recomputed ones")
                return False, msgs
            if len(paths) != len(stored_paths):
                msgs.append("stored path count differs from the recomputed one")
                return False, msgs
            overall = 0
            ok = True
            for path, stored in zip(paths, stored_paths):
                if [graph.class_label(c) for c in path] != list(stored.get("classes", [])):
                    msgs.append("stored path differs from the recomputed one")
                    ok = False
                    continue
                positions = [i for c in path for i in graph.classes[c]]
                pairs_q = tuple(dp.pairs[i] for i in positions)
                uidx = usable_rules(pairs_q, trs)
                urules = tuple(trs.rules[i - 1] for i in uidx)
                system = pairs_q + urules
                _, constructors = _system_split(system)
                mu = _mu_for(system, cert.mode)
                if list(uidx) != list(stored.get("usable", [])):
                    msgs.append("stored usable rules differ from the recomputed ones")
                    ok = False
                if _mu_from_json(stored["mu"]) != mu:
                    msgs.append("stored replacement map differs from the recomputed one")
                    ok = False
                gap_part = interp_from_json(stored["gap_interpretation"])
                label = f"path {stored.get('classes')}"
                ok = _check_interp(
                    gap_part,
                    strict=urules,
                    weak=(),
                    mu=mu,
                    constructors=constructors,
                    compounds=dp.compounds,
                    msgs=msgs,
                    label=f"{label} gap interpretation",
                ) and ok
                if stored.get("gap_kind") == "strongly-linear":
                    delta = nonduplicating_slmi_gap(gap_part, pairs_q)
                else:
                    delta = weight_gap_delta(gap_part, pairs_q)
                if delta is None or delta != stored.get("delta"):
                    msgs.append(f"{label}: stored gap does not check out")
                    ok = False
                overall = max(overall, degree(gap_part, constructors))
                steps = stored.get("steps", [])
                if len(steps) != len(path):
                    msgs.append(f"{label}: one interpretation per class expected")
                    ok = False
                    continue
                seen: list[Rule] = []
                for c, step in zip(path, steps):
                    cls_pairs = graph.class_pairs(c)
                    interp = interp_from_json(step["interpretation"])
                    # terms in the derivation prefix this step counts only
                    # contain symbols of the rules it orients, so the
                    # monotonicity duty is scoped to those
                    step_occ = _occurring(cls_pairs + tuple(seen) + urules)
                    step_mu = frozenset((s, i) for s, i in mu if s in step_occ)
                    ok = _check_interp(
                        interp,
                        strict=cls_pairs,
                        weak=tuple(seen) + urules,
                        mu=step_mu,
                        constructors=constructors,
                        compounds=dp.compounds,
                        msgs=msgs,
                        label=f"{label} class {step.get('class')}",
                    ) and ok
                    overall = max(overall, degree(interp, constructors))
                    seen.extend(cls_pairs)
            if overall != cert.degree:
                msgs.append(f"claimed degree {cert.degree}, recomputed {overall}")
                ok = False
            return ok and not msgs, msgs
    except (KeyError, ValueError, TypeError) as exc:
        return False, [f"malformed certificate: {exc}"]
    return False, [f"unknown strategy {cert.strategy!r}"]


def fit_constant(points: Iterable[tuple[int, int]], deg: int) -> Fraction:
    """Smallest C from the sample's values and increments so that
    v <= C * n^deg is plausible beyond the sample.

    Plain value ratios underestimate steep affine growth, so consecutive
    increments are covered as well."""
    pts = sorted(points)
    c = Fraction(0)
    for n, v in pts:
        if n > 0:
            c = max(c, Fraction(v, n**deg))
    for (n1, v1), (n2, v2) in zip(pts, pts[1:]):
        den = n2**deg - n1**deg
        if den > 0 and v2 > v1:
            c = max(c, Fraction(v2 - v1, den))
    return c


def bound_holds(points: Iterable[tuple[int, int]], deg: int, c: Fraction) -> bool:
    return all(Fraction(v) <= c * n**deg for n, v in points)
