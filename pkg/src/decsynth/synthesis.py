"""Monolithic and modular supervisor synthesis, and the three-step reduction.

``sup_cn`` is the textbook explicit-state algorithm: build the plant under
the requirements and prune, to a greatest fixed point, every state that is
not coreachable or from which the plant can escape with an uncontrollable
event.  ``plan_reduction``/``execute_plan`` decide from the model structure
how much of that work is actually necessary.
"""

from __future__ import annotations

import enum
import os
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .automata import Automaton, Event, Product, explore, state_name
from .depgraph import (DependencyGraph, SccAnalysis, analyze, build_graph,
                       dropped_negations, is_acyclic_selfloop_free, simplify_partial_problem)
from .errors import EmptySupervisor, NotApplicable
from .problem import ControlProblem, PropertyReport, check_cnms, check_rcnms
from .requirements import requirement_guard

DEFAULT_BOUND = 10**7


def default_bound() -> int:
    return int(os.environ.get("DECSYNTH_BOUND", DEFAULT_BOUND))


@dataclass(frozen=True)
class SynthesisResult:
    label: str
    plants: tuple[str, ...]
    supervisor: Automaton
    uncontrolled_size: int   # reachable states of the plant composition
    closed_loop_size: int    # reachable states of plant || requirements
    controlled_size: int
    removed_transitions: tuple[tuple[str, str], ...]
    iterations: int
    duration_ms: float = field(default=0.0, compare=False)

    @property
    def pruned(self) -> bool:
        return self.controlled_size < self.closed_loop_size or bool(self.removed_transitions)


def _plant_under_requirements(cp: ControlProblem, bound: int) -> tuple[Product, list[list[tuple[Event, int, bool]]]]:
    plant = explore(cp.plants, bound=bound)
    allow = requirement_guard(cp.requirements, cp.plant_names)
    edges = [[(e, j, allow(s, e)) for e, j in row.items()]
             for s, row in zip(plant.states, plant.succ)]
    return plant, edges


def sup_cn(cp: ControlProblem, bound: Optional[int] = None, label: str = "S") -> SynthesisResult:
    """Maximally permissive controllable and nonblocking supervisor of ``cp``.

    Raises :class:`EmptySupervisor` when the initial state gets pruned.
    """
    started = time.perf_counter()
    bound = default_bound() if bound is None else bound
    plant, edges = _plant_under_requirements(cp, bound)
    n = len(plant)

    # reachable part of plant || requirements
    alive = [False] * n
    alive[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for _, j, ok in edges[i]:
            if ok and not alive[j]:
                alive[j] = True
                queue.append(j)
    closed_loop_size = sum(alive)

    pred = [[] for _ in range(n)]          # allowed edges, reversed
    upred = [[] for _ in range(n)]         # uncontrollable plant edges, reversed
    for i, row in enumerate(edges):
        for e, j, ok in row:
            if ok:
                pred[j].append(i)
            if not e.controllable:
                upred[j].append(i)
    marked = [plant.is_marked(i) for i in range(n)]

    iterations = 0
    while True:
        iterations += 1
        changed = False

        # (i) drop states that cannot reach a marked state inside the survivors
        coreach = [False] * n
        queue = deque(i for i in range(n) if alive[i] and marked[i])
        for i in queue:
            coreach[i] = True
        while queue:
            j = queue.popleft()
            for i in pred[j]:
                if alive[i] and not coreach[i]:
                    coreach[i] = True
                    queue.append(i)
        for i in range(n):
            if alive[i] and not coreach[i]:
                alive[i] = False
                changed = True

        # (ii) drop states where an uncontrollable plant event is disabled or leaves the survivors
        queue = deque()
        for i in range(n):
            if alive[i] and any(not e.controllable and (not ok or not alive[j]) for e, j, ok in edges[i]):
                alive[i] = False
                queue.append(i)
        while queue:
            j = queue.popleft()
            changed = True
            for i in upred[j]:
                if alive[i]:
                    alive[i] = False
                    queue.append(i)

        if not changed:
            break

    if not alive[0]:
        raise EmptySupervisor(label, iterations)

    keep = [0]
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for _, j, ok in edges[i]:
            if ok and alive[j] and j not in seen:
                seen.add(j)
                keep.append(j)
                queue.append(j)
    keep_set = set(keep)

    removed = tuple(
        (state_name(plant.states[i]), e.name)
        for i in keep for e, j, ok in edges[i] if ok and j not in keep_set)
    names = {i: state_name(plant.states[i]) for i in keep}
    supervisor = Automaton(
        name=label,
        states=tuple(names[i] for i in keep),
        alphabet=plant.alphabet,
        transitions={(names[i], e): names[j] for i in keep for e, j, ok in edges[i] if ok and j in keep_set},
        initial=names[0],
        marked=frozenset(names[i] for i in keep if marked[i]),
    )
    return SynthesisResult(
        label=label,
        plants=cp.plant_names,
        supervisor=supervisor,
        uncontrolled_size=n,
        closed_loop_size=closed_loop_size,
        controlled_size=len(keep),
        removed_transitions=removed,
        iterations=iterations,
        duration_ms=(time.perf_counter() - started) * 1000.0,
    )


def sup_cn_modular(cp: ControlProblem, bound: Optional[int] = None) -> list[SynthesisResult]:
    """One supervisor per requirement, each against the full plant."""
    return [sup_cn(ControlProblem(cp.plants, (r,)), bound, label=f"S_{r.id}") for r in cp.requirements]


class Verdict(enum.Enum):
    SKIP_BY_CNMS = "SkipByCNMS"
    SKIP_BY_ACYCLIC = "SkipByAcyclic"
    SECTIONALIZE = "Sectionalize"


@dataclass(frozen=True)
class ReductionPlan:
    verdict: Verdict
    partial_problems: tuple[ControlProblem, ...]
    residual: frozenset[str]
    cnms: PropertyReport
    rcnms: PropertyReport
    graph: DependencyGraph
    analysis: Optional[SccAnalysis] = None
    diagnostics: tuple[str, ...] = ()

    @property
    def skips_synthesis(self) -> bool:
        return self.verdict is not Verdict.SECTIONALIZE

    def classes(self) -> list[list[str]]:
        return [list(p.plant_names) for p in self.partial_problems]


def plan_reduction(cp: ControlProblem) -> ReductionPlan:
    """Decide whether synthesis can be skipped, or to which partial problems it reduces.

    Raises :class:`NotApplicable` when the problem violates RCNMS.
    """
    cnms = check_cnms(cp)
    rcnms = check_rcnms(cp)
    if not rcnms.satisfied:
        raise NotApplicable(rcnms)
    graph = build_graph(cp)
    everything = frozenset(cp.plant_names)
    if cnms.satisfied:
        return ReductionPlan(Verdict.SKIP_BY_CNMS, (), everything, cnms, rcnms, graph)
    if is_acyclic_selfloop_free(graph):
        return ReductionPlan(Verdict.SKIP_BY_ACYCLIC, (), everything, cnms, rcnms, graph)

    analysis = analyze(graph)
    partials = []
    notes = []
    for w in analysis.partition:
        partials.append(simplify_partial_problem(cp, w.vertices))
        notes.extend(dropped_negations(cp, w.vertices))
    residual = frozenset(cp.plants[v].name for v in analysis.residual)
    return ReductionPlan(Verdict.SECTIONALIZE, tuple(partials), residual, cnms, rcnms,
                         graph, analysis, tuple(notes))


def execute_plan(cp: ControlProblem, plan: ReductionPlan, bound: Optional[int] = None,
                 executor=None) -> list[SynthesisResult]:
    """Synthesise one supervisor per partial problem of a Sectionalize plan.

    The partial problems share no plants, so an ``concurrent.futures``
    executor may run them in parallel.
    """
    if plan.skips_synthesis:
        return []
    jobs = [(p, bound, f"S{k}") for k, p in enumerate(plan.partial_problems, start=1)]
    if executor is None:
        return [sup_cn(*job) for job in jobs]
    return list(executor.map(lambda job: sup_cn(*job), jobs))
