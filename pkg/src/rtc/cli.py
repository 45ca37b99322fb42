"""Command line front end.

The first stdout line is always the verdict: either "YES(?,O(n^k))" with the
certified degree k, or "MAYBE". Exit code 0 means certified, 1 means no
certificate, 2 means the input could not be read or parsed.
"""

from __future__ import annotations

import argparse
import sys

from .deppairs import (
    standard_dependency_pairs,
    usable_rules,
    weak_dependency_pairs,
    weak_innermost_dependency_pairs,
)
from .graphs import congruence_graph, format_dot
from .interp import format_interpretation, interp_from_json
from .pipeline import (
    AnalysisOptions,
    analyze,
    bound_holds,
    fit_constant,
    verdict_line,
)
from .replacement import format_map, innermost_usable_map, usable_map
from .rewriting import runtime_complexity
from .terms import funs_of
from .trs import TRS, TrsError, format_rule, parse_trs, print_trs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rtc",
        description="Polynomial runtime-complexity analysis for term rewrite systems.",
    )
    p.add_argument("path", help="input file in TPDB format, or - for stdin")
    p.add_argument("--mode", choices=["full", "innermost"], default=None,
                   help="rewrite strategy; defaults to the file's STRATEGY")
    p.add_argument("--dim", type=int, default=2, metavar="D",
                   help="largest interpretation dimension to try (default 2)")
    p.add_argument("--coeff-bound", type=int, default=3, metavar="B",
                   help="largest coefficient entry to try (default 3)")
    p.add_argument("--degree-cap", type=int, default=None, metavar="K",
                   help="reject certificates above this degree")
    p.add_argument("--search-budget", type=int, default=200_000, metavar="N",
                   help="node budget per interpretation search (default 200000)")
    p.add_argument("--timeout", type=float, default=60.0, metavar="S",
                   help="overall time budget in seconds (default 60)")
    p.add_argument("--format", choices=["plain", "certificate", "dot", "json-certificate"],
                   default="plain", help="extra output after the verdict")
    p.add_argument("--oracle", type=int, default=None, metavar="N",
                   help="cross-check against brute-forced runtime complexity up to size N")
    p.add_argument("--fuel", type=int, default=100_000, metavar="F",
                   help="step budget per brute-forced derivation (default 100000)")
    p.add_argument("--dump", choices=["trs", "wdp", "widp", "dp", "usable", "maps", "graph"],
                   default=None, help="print a transformation instead of analyzing")
    return p


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _dump(trs: TRS, what: str, mode: str) -> str:
    if what == "trs":
        return print_trs(trs)
    if what == "wdp":
        return weak_dependency_pairs(trs).format_pairs()
    if what == "widp":
        return weak_innermost_dependency_pairs(trs).format_pairs()
    if what == "dp":
        return standard_dependency_pairs(trs).format_pairs()
    dp = weak_innermost_dependency_pairs(trs) if mode == "innermost" else weak_dependency_pairs(trs)
    if what == "usable":
        idx = usable_rules(dp.pairs, trs)
        return "\n".join(f"{i}: {format_rule(trs.rules[i - 1])}" for i in idx)
    if what == "maps":
        system = dp.pairs + tuple(trs.rules[i - 1] for i in usable_rules(dp.pairs, trs))
        signature = sorted(
            {s for r in system for t in (r.lhs, r.rhs) for s in funs_of(t)},
            key=lambda s: (s.name, s.arity),
        )
        lines = ["innermost usable map:"]
        lines.append(format_map(innermost_usable_map(system), signature))
        lines.append("usable map:")
        lines.append(format_map(usable_map(system), signature))
        return "\n".join(lines)
    if what == "graph":
        return format_dot(congruence_graph(dp))
    raise ValueError(f"unknown dump {what!r}")


def _print_certificate(cert) -> None:
    print(f"strategy: {cert.strategy}")
    print(f"mode: {cert.mode}")
    print(f"degree: {cert.degree}")
    ev = cert.evidence
    if "interpretation" in ev:
        print("interpretation:")
        print(format_interpretation(interp_from_json(ev["interpretation"]), "A"))
    if "pair_interpretation" in ev:
        print("pair interpretation:")
        print(format_interpretation(interp_from_json(ev["pair_interpretation"]), "B"))
        print("gap interpretation:")
        print(format_interpretation(interp_from_json(ev["gap_interpretation"]), "A"))
        print(f"gap: {ev['delta']} ({ev['gap_kind']})")
    for path in ev.get("paths", []):
        print(f"path {' '.join(path['classes'])}:")
        print(f"  usable: {' '.join(str(i) for i in path['usable']) or '(none)'}")
        print(f"  gap: {path['delta']} ({path['gap_kind']})")
        print("  gap interpretation:")
        for line in format_interpretation(
            interp_from_json(path["gap_interpretation"]), "A"
        ).splitlines():
            print("  " + line)
        for k, step in enumerate(path["steps"], start=1):
            print(f"  class {step['class']} interpretation:")
            for line in format_interpretation(
                interp_from_json(step["interpretation"]), f"B{k}"
            ).splitlines():
                print("  " + line)


def _oracle_table(trs: TRS, mode: str, upto: int, fuel: int, cert) -> bool:
    memo: dict = {}
    rows: list[tuple[int, int]] = []
    any_diverged = False
    for n in range(1, upto + 1):
        height, diverged = runtime_complexity(trs, n, mode=mode, fuel=fuel, memo=memo)
        if diverged:
            any_diverged = True
            print(f"{n} {height} (diverged)")
        else:
            print(f"{n} {height}")
            rows.append((n, height))
    if cert is None:
        return True
    if any_diverged:
        print("oracle: FAIL (some derivation was unbounded or ran out of fuel)")
        return False
    fit = rows[: min(5, len(rows))]
    c = fit_constant(fit, cert.degree)
    if bound_holds(rows, cert.degree, c):
        print(f"oracle: PASS (C={c})")
        return True
    print(f"oracle: FAIL (C={c} fitted on the first {len(fit)} sizes does not cover the rest)")
    return False


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _read_input(args.path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        trs = parse_trs(text)
    except TrsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    mode = args.mode or trs.strategy
    if args.dump:
        out = _dump(trs, args.dump, mode)
        if out:
            print(out)
        return 0
    opts = AnalysisOptions(
        mode=mode,
        max_dim=args.dim,
        coeff_bound=args.coeff_bound,
        degree_cap=args.degree_cap,
        search_nodes=args.search_budget,
        timeout=args.timeout,
    )
    cert, notes = analyze(trs, mode, opts)
    print(verdict_line(cert))
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    if args.format == "certificate" and cert is not None:
        _print_certificate(cert)
    elif args.format == "json-certificate" and cert is not None:
        print(cert.to_json())
    elif args.format == "dot":
        dp = weak_innermost_dependency_pairs(trs) if mode == "innermost" else weak_dependency_pairs(trs)
        print(format_dot(congruence_graph(dp)))
    if args.oracle:
        _oracle_table(trs, mode, args.oracle, args.fuel, cert)
    return 0 if cert is not None else 1


if __name__ == "__main__":
    sys.exit(main())
