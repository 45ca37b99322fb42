"""Dependency graph over pairs and its congruence condensation.

Edges are estimated with the usual cap-and-unify test: argument subterms
that could be rewritten by the origin rules are abstracted to fresh
variables, and an edge is drawn when the abstracted right-hand component
unifies with the next pair's left-hand side. The congruence graph is the
condensation into strongly connected classes; self-loops disappear there
by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .deppairs import DpProblem
from .terms import App, FreshVars, Symbol, Term, Var, rename_apart, unify, vars_of
from .trs import Rule


def tcap(rules: Iterable[Rule], t: Term, fresh: FreshVars | None = None) -> Term:
    """Abstract every subterm a rule could touch to a fresh variable."""
    rules = tuple(rules)
    if fresh is None:
        fresh = FreshVars(avoid=vars_of(t))

    def cap(u: Term) -> Term:
        if isinstance(u, Var):
            return fresh.fresh()
        capped = App(u.sym, tuple(cap(a) for a in u.args))
        for rule in rules:
            if not isinstance(rule.lhs, App) or rule.lhs.sym is not u.sym:
                continue
            lhs = rename_apart(rule.lhs, vars_of(capped))
            if unify(capped, lhs) is not None:
                return fresh.fresh()
        return capped

    return cap(t)


def rhs_components(problem: DpProblem, pair: Rule) -> tuple[Term, ...]:
    """Marked subterms of a pair rhs that can start the next pair step.

    A variable or nullary-compound rhs yields nothing: such pairs collapse
    and have no outgoing edges.
    """
    rhs = pair.rhs
    if isinstance(rhs, Var):
        return ()
    if rhs.sym in problem.compounds:
        return tuple(a for a in rhs.args if isinstance(a, App))
    return (rhs,)


def dependency_edges(problem: DpProblem) -> frozenset[tuple[int, int]]:
    """0-based (i, j) positions with a possible step from pair i to pair j."""
    rules = problem.origin.rules
    edges: set[tuple[int, int]] = set()
    for i, pair in enumerate(problem.pairs):
        for comp in rhs_components(problem, pair):
            fresh = FreshVars(avoid=vars_of(comp))
            capped = App(comp.sym, tuple(tcap(rules, a, fresh) for a in comp.args))
            for j, cand in enumerate(problem.pairs):
                lhs = cand.lhs
                if not isinstance(lhs, App) or lhs.sym is not capped.sym:
                    continue
                renamed = rename_apart(lhs, vars_of(capped))
                if unify(capped, renamed) is not None:
                    edges.add((i, j))
    return frozenset(edges)


def _tarjan(n: int, adj: list[list[int]]) -> list[list[int]]:
    index: list[int | None] = [None] * n
    low = [0] * n
    onstack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        frames: list[list[int]] = [[root, 0]]
        while frames:
            frame = frames[-1]
            v = frame[0]
            if frame[1] == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack[v] = True
            pushed = False
            while frame[1] < len(adj[v]):
                w = adj[v][frame[1]]
                frame[1] += 1
                if index[w] is None:
                    frames.append([w, 0])
                    pushed = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp: list[int] = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    return sccs


@dataclass(frozen=True)
class CongruenceGraph:
    problem: DpProblem
    pair_edges: frozenset[tuple[int, int]]
    classes: tuple[tuple[int, ...], ...]
    dag_edges: frozenset[tuple[int, int]]
    sources: tuple[int, ...]

    def class_label(self, c: int) -> str:
        members = ",".join(str(self.problem.display_index(i)) for i in self.classes[c])
        return "{" + members + "}"

    def successors(self, c: int) -> tuple[int, ...]:
        return tuple(sorted(j for (i, j) in self.dag_edges if i == c))

    def class_pairs(self, c: int) -> tuple[Rule, ...]:
        return tuple(self.problem.pairs[i] for i in self.classes[c])


def congruence_graph(problem: DpProblem) -> CongruenceGraph:
    n = len(problem.pairs)
    edges = dependency_edges(problem)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in sorted(edges):
        adj[i].append(j)
    sccs = _tarjan(n, adj)
    sccs.sort(key=lambda comp: comp[0])
    cls_of = {v: c for c, comp in enumerate(sccs) for v in comp}
    dag = frozenset(
        (cls_of[i], cls_of[j]) for (i, j) in edges if cls_of[i] != cls_of[j]
    )
    has_in = {j for (_, j) in dag}
    sources = tuple(c for c in range(len(sccs)) if c not in has_in)
    return CongruenceGraph(problem, edges, tuple(tuple(c) for c in sccs), dag, sources)


def maximal_source_paths(graph: CongruenceGraph) -> tuple[tuple[int, ...], ...]:
    """Every non-extendable class path starting at a source, in lexicographic
    order of class indices. The condensation is acyclic so plain DFS suffices."""
    paths: list[tuple[int, ...]] = []

    def extend(path: tuple[int, ...]) -> None:
        outs = graph.successors(path[-1])
        if not outs:
            paths.append(path)
            return
        for nxt in outs:
            extend(path + (nxt,))

    for src in graph.sources:
        extend((src,))
    return tuple(paths)


def format_dot(graph: CongruenceGraph) -> str:
    lines = ["digraph congruence {"]
    for c in range(len(graph.classes)):
        lines.append(f'  n{c} [label="{graph.class_label(c)}"];')
    for i, j in sorted(graph.dag_edges):
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines)
