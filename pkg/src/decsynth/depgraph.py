"""Dependency graphs of control problems and their cycle analysis.

Vertices are plant indices.  Each requirement contributes one edge from the
plant owning its restricted event to every plant its condition mentions.
Cyclic strongly connected components are the only places where synthesis
can still be needed; :func:`analyze` computes them, their backward closures
and the merge of overlapping closures into independent partial problems.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ModelError
from .problem import ControlProblem, requirement_owner
from .requirements import Condition, Literal, StateEventInvariant, condition_plants

RED = "#d62728"
PURPLE = "#9467bd"
BLUE = "#1f77b4"


@dataclass(frozen=True)
class Edge:
    init: int
    ter: int
    requirement: str


@dataclass(frozen=True)
class DependencyGraph:
    names: tuple[str, ...]
    edges: tuple[Edge, ...]

    @property
    def vertices(self) -> range:
        return range(len(self.names))

    def successors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.names]
        for e in self.edges:
            if e.ter not in adj[e.init]:
                adj[e.init].append(e.ter)
        return adj

    def predecessors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.names]
        for e in self.edges:
            if e.init not in adj[e.ter]:
                adj[e.ter].append(e.init)
        return adj

    def label(self, vertices: Iterable[int]) -> list[str]:
        return [self.names[v] for v in sorted(vertices)]


def build_graph(cp: ControlProblem) -> DependencyGraph:
    """Edges in requirement order, then in plant order of the referenced plants."""
    edges = []
    for r in cp.requirements:
        owner = requirement_owner(cp, r)
        for ter in sorted(cp.plant_index[n] for n in condition_plants(r)):
            edges.append(Edge(owner, ter, r.id))
    return DependencyGraph(cp.plant_names, tuple(edges))


def strongly_connected_components(n: int, successors: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm without recursion.

    Components come out in reverse topological order, exactly as the
    recursive formulation would emit them.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            succ = successors[v]
            if pos < len(succ):
                work[-1] = (v, pos + 1)
                w = succ[pos]
                if index[w] == -1:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
    return sccs


def has_self_loop(g: DependencyGraph) -> bool:
    return any(e.init == e.ter for e in g.edges)


def is_acyclic_selfloop_free(g: DependencyGraph) -> bool:
    if has_self_loop(g):
        return False
    return all(len(c) == 1 for c in strongly_connected_components(len(g.names), g.successors()))


def cyclic_sccs(g: DependencyGraph) -> list[frozenset[int]]:
    """Components with a cycle, plus self-looped singletons (routed to synthesis as well)."""
    loops = {e.init for e in g.edges if e.init == e.ter}
    comps = strongly_connected_components(len(g.names), g.successors())
    phis = [frozenset(c) for c in comps if len(c) > 1 or c[0] in loops]
    return sorted(phis, key=min)


def extend(g: DependencyGraph, phi: Iterable[int]) -> frozenset[int]:
    """All vertices with a (possibly empty) path into ``phi``."""
    pred = g.predecessors()
    seen = set(phi)
    queue = deque(sorted(seen))
    while queue:
        for u in pred[queue.popleft()]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return frozenset(seen)


@dataclass(frozen=True)
class WClass:
    """An equivalence class of overlapping extended vertex sets."""

    members: tuple[frozenset[int], ...]
    vertices: frozenset[int]


def quotient(vsets: Sequence[frozenset[int]]) -> list[WClass]:
    """Merge sets that share a vertex, transitively."""
    parent = list(range(len(vsets)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    first_seen: dict[int, int] = {}
    for i, vs in enumerate(vsets):
        for v in vs:
            j = first_seen.setdefault(v, i)
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(len(vsets)):
        groups.setdefault(find(i), []).append(i)
    return [WClass(tuple(vsets[i] for i in idx), frozenset().union(*(vsets[i] for i in idx)))
            for _, idx in sorted(groups.items())]


@dataclass(frozen=True)
class SccAnalysis:
    phis: tuple[frozenset[int], ...]
    extended: tuple[frozenset[int], ...]
    partition: tuple[WClass, ...]
    residual: frozenset[int]


def analyze(g: DependencyGraph) -> SccAnalysis:
    phis = cyclic_sccs(g)
    extended = [extend(g, phi) for phi in phis]
    partition = quotient(extended)
    covered = frozenset().union(*(w.vertices for w in partition))
    residual = frozenset(v for v in g.vertices if v not in covered)
    return SccAnalysis(tuple(phis), tuple(extended), tuple(partition), residual)


def simplify_partial_problem(cp: ControlProblem, keep: Iterable[int]) -> ControlProblem:
    """Restrict ``cp`` to the plants in ``keep``.

    Requirements survive when their event belongs to a kept plant; every
    literal that refers to a dropped plant becomes ``T``.
    """
    keep = set(keep)
    bad = [k for k in keep if not 0 <= k < len(cp.plants)]
    if bad:
        raise ModelError(f"plant indices out of range: {sorted(bad)}")
    kept_names = {cp.plants[k].name for k in keep}
    requirements = []
    for r in cp.requirements:
        if not any(k in keep for k in cp.owners(r.event)):
            continue
        cond = Condition(tuple(
            tuple(lit if not lit.is_ref or lit.plant in kept_names else Literal.true() for lit in conj)
            for conj in r.condition.disjuncts))
        requirements.append(StateEventInvariant(r.id, r.event, cond))
    return ControlProblem(tuple(p for k, p in enumerate(cp.plants) if k in keep), tuple(requirements))


def dropped_negations(cp: ControlProblem, keep: Iterable[int]) -> list[str]:
    """Negated literals that :func:`simplify_partial_problem` weakens to ``T``."""
    keep = set(keep)
    kept_names = {cp.plants[k].name for k in keep}
    out = []
    for r in cp.requirements:
        if not any(k in keep for k in cp.owners(r.event)):
            continue
        for lit in r.condition.literals():
            if lit.is_ref and lit.negated and lit.plant not in kept_names:
                out.append(f"{r.id}: negated literal '{lit}' on residual plant {lit.plant} replaced by T")
    return out


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(g: DependencyGraph, analysis: Optional[SccAnalysis] = None, name: str = "dependencies") -> str:
    """Graphviz text; with an analysis, cycles are red, extensions purple, residual blue."""
    colour: dict[int, str] = {}
    phi_of: dict[int, int] = {}
    extension: set[int] = set()
    if analysis is not None:
        for i, phi in enumerate(analysis.phis):
            for v in phi:
                phi_of[v] = i
                colour[v] = RED
        for vs in analysis.extended:
            for v in vs:
                if v not in phi_of:
                    extension.add(v)
                    colour[v] = PURPLE
        for v in analysis.residual:
            colour[v] = BLUE

    lines = [f"digraph {_quote(name)} {{", "  node [shape=circle];"]
    for v in g.vertices:
        attrs = f' [color="{colour[v]}", fontcolor="{colour[v]}"]' if v in colour else ""
        lines.append(f"  {_quote(g.names[v])}{attrs};")
    for n, e in enumerate(g.edges, start=1):
        attrs = [f"id={_quote(f'e{n}')}", f"label={_quote(e.requirement)}"]
        if analysis is not None:
            if e.init in phi_of and phi_of.get(e.ter) == phi_of[e.init]:
                attrs.append(f'color="{RED}"')
            elif e.init in extension and (e.ter in extension or e.ter in phi_of):
                attrs.append(f'color="{PURPLE}"')
        lines.append(f"  {_quote(g.names[e.init])} -> {_quote(g.names[e.ter])} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
