"""Brute-force verifiers and seeded random problem generators.

Nothing in this module reuses the synthesis fixed point: closed loops are
checked by direct product exploration, and maximal permissiveness by
exhaustive enumeration of candidate state sets.  The generators build
control problems that satisfy CNMS / acyclic RCNMS by construction, or
RCNMS with planted 2-cycles.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .automata import Automaton, Event, Product, explore, language_difference, run, state_name
from .errors import AutomatonError
from .problem import ControlProblem
from .requirements import Condition, Literal, StateEventInvariant, requirement_guard

VERIFY_BOUND = 10**6
EXHAUSTIVE_LIMIT = 10


@dataclass(frozen=True)
class Witness:
    """An event string from the closed loop's initial state to ``state``."""

    events: tuple[str, ...]
    state: str
    note: str = ""

    def replay(self, aut: Automaton) -> Optional[str]:
        return run(aut, self.events)


@dataclass(frozen=True)
class VerificationVerdict:
    safe: bool
    controllable: bool
    nonblocking: bool
    maximally_permissive: Optional[bool] = None
    witnesses: dict = field(default_factory=dict)
    closed_loop: Optional[Automaton] = field(default=None, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return (self.safe and self.controllable and self.nonblocking
                and self.maximally_permissive is not False)


def _witness(prod: Product, target: int, extra: Optional[Event] = None, note: str = "") -> Witness:
    path = prod.path_to(target)
    state = prod.states[target]
    if extra is not None:
        path.append(extra)
        state = prod.states[prod.succ[target][extra]]
    return Witness(tuple(e.name for e in path), state_name(state), note)


def closed_loop_product(cp: ControlProblem, supervisors: Sequence[Automaton],
                        bound: int = VERIFY_BOUND, with_requirements: bool = False) -> Product:
    """plant || supervisors, optionally also filtered by the requirements."""
    plant_events = {e.name: e for p in cp.plants for e in p.alphabet}
    for s in supervisors:
        foreign = sorted(e.name for e in s.alphabet if e.name not in plant_events)
        if foreign:
            raise AutomatonError(f"supervisor {s.name!r} uses events outside the plant: {', '.join(foreign)}")
    allow = requirement_guard(cp.requirements, cp.plant_names) if with_requirements else None
    return explore(tuple(cp.plants) + tuple(supervisors), allow=allow, bound=bound)


def verify_closed_loop(cp: ControlProblem, supervisors: Sequence[Automaton] = (),
                       bound: int = VERIFY_BOUND, check_maximal: bool = False,
                       exhaustive_limit: int = EXHAUSTIVE_LIMIT,
                       with_requirements: bool = False) -> VerificationVerdict:
    """Check safety, controllability, nonblockingness (and optionally maximality).

    An empty supervisor list means the requirements themselves act as the
    supervisor, i.e. the closed loop is plant || requirements.  With
    ``with_requirements`` the requirements are composed in addition to the
    supervisors, which is how sectionalized supervisors are meant to be used.
    """
    if not supervisors:
        with_requirements = True
    prod = closed_loop_product(cp, supervisors, bound, with_requirements)
    n_plants = len(cp.plants)
    allow = requirement_guard(cp.requirements, cp.plant_names)
    plant_outs = [p.out for p in cp.plants]
    witnesses: dict[str, Witness] = {}

    for i, s in enumerate(prod.states):
        plant_part = s[:n_plants]
        if "safety" not in witnesses:
            for e in prod.succ[i]:
                if not allow(plant_part, e):
                    witnesses["safety"] = _witness(prod, i, e, f"{e.name} violates a requirement")
                    break
        if "controllability" not in witnesses:
            enabled = prod.succ[i]
            for k, q in enumerate(plant_part):
                for e in plant_outs[k][q]:
                    if e.controllable or e in enabled:
                        continue
                    owners_ok = all(e not in cp.plants[m].alphabet or e in plant_outs[m][plant_part[m]]
                                    for m in range(n_plants))
                    if owners_ok:
                        witnesses["controllability"] = _witness(
                            prod, i, note=f"uncontrollable {e.name} disabled")
                        break
                if "controllability" in witnesses:
                    break

    coreach = prod.coreachable()
    blocking = next((i for i, ok in enumerate(coreach) if not ok), None)
    if blocking is not None:
        witnesses["nonblocking"] = _witness(prod, blocking, note="no marked state reachable")

    maximal = None
    closed = prod.to_automaton("closed-loop")
    if check_maximal:
        supremum = exhaustive_supremum(cp, exhaustive_limit)
        if supremum is not None:
            diff = language_difference(supremum, closed)
            maximal = diff is None and language_difference(closed, supremum) is None
            if not maximal:
                events = tuple(e.name for e in (diff or language_difference(closed, supremum)))
                witnesses["maximal_permissiveness"] = Witness(
                    events, run(supremum, events) or "", "string separating the closed loop from the supremum")

    return VerificationVerdict(
        safe="safety" not in witnesses,
        controllable="controllability" not in witnesses,
        nonblocking="nonblocking" not in witnesses,
        maximally_permissive=maximal,
        witnesses=witnesses,
        closed_loop=closed,
    )


def requirements_supervised(cp: ControlProblem, bound: int = VERIFY_BOUND) -> Automaton:
    """plant || requirements as an automaton over the plant product, for use as a supervisor."""
    prod = explore(cp.plants, allow=requirement_guard(cp.requirements, cp.plant_names), bound=bound)
    return prod.to_automaton("P||R")


def conflict_witness(supervisors: Sequence[Automaton], bound: int = VERIFY_BOUND) -> Optional[Witness]:
    prod = explore(supervisors, bound=bound)
    coreach = prod.coreachable()
    for i, ok in enumerate(coreach):
        if not ok:
            return _witness(prod, i, note="blocking state of the composed supervisors")
    return None


def is_nonconflicting(supervisors: Sequence[Automaton], bound: int = VERIFY_BOUND) -> bool:
    return conflict_witness(supervisors, bound) is None


def blocking_states(supervisors: Sequence[Automaton], bound: int = VERIFY_BOUND) -> list[tuple[str, ...]]:
    """Reachable, non-coreachable states of the composition, as component-state tuples."""
    prod = explore(supervisors, bound=bound)
    return [prod.states[i] for i, ok in enumerate(prod.coreachable()) if not ok]


def exhaustive_supremum(cp: ControlProblem, limit: int = EXHAUSTIVE_LIMIT) -> Optional[Automaton]:
    """Largest controllable, nonblocking sub-behaviour of plant || requirements, by enumeration.

    Every subset X of the reachable states of plant || requirements that
    contains the initial state is a candidate; X qualifies when every member
    reaches a marked member inside X and no uncontrollable plant event leaves
    X or is vetoed by a requirement.  Qualifying sets are closed under union,
    so their union is the supremum.  Returns ``None`` when nothing qualifies.
    Raises :class:`SizeBoundExceeded` beyond ``limit`` states.
    """
    allow = requirement_guard(cp.requirements, cp.plant_names)
    loop = explore(cp.plants, allow=allow, bound=limit)
    n = len(loop)
    outs = [p.out for p in cp.plants]
    owners = {e: [k for k, p in enumerate(cp.plants) if e in p.alphabet] for e in loop.alphabet}

    # uncontrollable plant moves per state: successor index, or None if it leaves
    # the requirement-reachable part or is vetoed
    escapes: list[list[Optional[int]]] = []
    for s in loop.states:
        row = []
        for e in {e for k, q in enumerate(s) for e in outs[k][q] if not e.controllable}:
            t = list(s)
            for k in owners[e]:
                nxt = outs[k][s[k]].get(e)
                if nxt is None:
                    break
                t[k] = nxt
            else:
                row.append(loop.index.get(tuple(t)) if allow(s, e) else None)
        escapes.append(row)
    pred = loop.predecessors()
    marked = {i for i in range(n) if loop.is_marked(i)}

    def qualifies(xs: set[int]) -> bool:
        if any(j is None or j not in xs for i in xs for j in escapes[i]):
            return False
        good = xs & marked
        frontier = list(good)
        while frontier:
            j = frontier.pop()
            for i, _ in pred[j]:
                if i in xs and i not in good:
                    good.add(i)
                    frontier.append(i)
        return good == xs

    union: set[int] = set()
    others = list(range(1, n))
    for r in range(len(others) + 1):
        for combo in itertools.combinations(others, r):
            xs = {0, *combo}
            if qualifies(xs):
                union |= xs
    if not union:
        return None
    assert qualifies(union)

    keep = [0]
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in loop.succ[i].values():
            if j in union and j not in seen:
                seen.add(j)
                keep.append(j)
                queue.append(j)
    return loop.to_automaton("supremum", keep)


# ---------------------------------------------------------------------------
# generators


def _cyclic_plant(rng: random.Random, name: str, n_states: int, kinds: Sequence[bool]) -> Automaton:
    """Strongly connected plant: a ring q0 -> ... -> q0 plus random chords.

    ``kinds`` lists the controllability of the events to use, one per
    transition; each transition gets its own event.
    """
    states = tuple(f"{name.lower()}_{i}" for i in range(n_states))
    pairs = [(i, (i + 1) % n_states) for i in range(n_states)]
    if n_states > 2:
        chords = [(i, j) for i in range(n_states) for j in range(n_states)
                  if i != j and (i, j) not in pairs]
        pairs += rng.sample(chords, rng.randint(0, min(2, len(chords))))
    events, trans = [], {}
    for t, (i, j) in enumerate(pairs):
        ev = Event(f"{name.lower()}_e{t}", kinds[t % len(kinds)])
        events.append(ev)
        trans[(states[i], ev)] = states[j]
    marked = {states[0]} | {q for q in states[1:] if rng.random() < 0.3}
    return Automaton(name, states, frozenset(events), trans, states[0], frozenset(marked))


def _random_conjunction(rng: random.Random, targets: Sequence[Automaton], max_len: int = 2) -> tuple[Literal, ...]:
    chosen = rng.sample(list(targets), rng.randint(1, min(max_len, len(targets))))
    lits = []
    for p in chosen:
        q = rng.choice(p.states)
        neg = len(p.states) > 1 and rng.random() < 0.3
        lits.append(Literal.ref(p.name, q, neg))
    return tuple(lits)


def _random_condition(rng: random.Random, targets: Sequence[Automaton]) -> Condition:
    return Condition(tuple(_random_conjunction(rng, targets) for _ in range(rng.randint(1, 2))))


def generate_cnms_instance(seed: int, plants: int, requirements: int,
                           max_states: int = 4) -> ControlProblem:
    """Random problem satisfying CNMS by construction.

    Sensors only have uncontrollable events, actuators only controllable
    ones, conditions mention sensors only, and every controllable event is
    restricted at most once.  ``requirements`` is an upper bound: a single
    plant leaves no sensor to refer to, so no requirement is generated then.
    """
    rng = random.Random(seed)
    n_sensors = 0 if plants == 1 else rng.randint(1, plants - 1)
    auts = []
    for k in range(plants):
        sensor = k < n_sensors
        name = f"{'S' if sensor else 'A'}{k + 1}"
        auts.append(_cyclic_plant(rng, name, rng.randint(2, max_states), [not sensor]))
    sensors = auts[:n_sensors]
    actuator_events = sorted(e for a in auts[n_sensors:] for e in a.alphabet)
    reqs = []
    if sensors:
        for k, ev in enumerate(rng.sample(actuator_events, min(requirements, len(actuator_events)))):
            reqs.append(StateEventInvariant(f"R{k + 1}", ev, _random_condition(rng, sensors)))
    return ControlProblem(tuple(auts), tuple(reqs))


def _mixed_kinds(rng: random.Random, kind: str) -> list[bool]:
    if kind == "sensor":
        return [False]
    if kind == "actuator":
        return [True]
    return [True, False]


def generate_acyclic_rcnms_instance(seed: int, plants: int, requirements: int,
                                    max_states: int = 4) -> ControlProblem:
    """Random RCNMS problem whose dependency graph is a DAG without self-loops.

    Plants are placed in a random order; a requirement on a plant may only
    mention plants that come strictly later, so every edge points forward.
    """
    rng = random.Random(seed)
    auts = []
    for k in range(plants):
        kind = rng.choice(["sensor", "actuator", "mixed"]) if plants > 1 else "actuator"
        auts.append(_cyclic_plant(rng, f"P{k + 1}", rng.randint(2, max_states), _mixed_kinds(rng, kind)))
    order = list(range(plants))
    rng.shuffle(order)
    position = {k: i for i, k in enumerate(order)}
    candidates = [(k, e) for k, a in enumerate(auts) for e in sorted(a.controllable)
                  if position[k] < plants - 1]
    reqs = []
    for k, ev in rng.sample(candidates, min(requirements, len(candidates))):
        later = [auts[m] for m in order[position[k] + 1:]]
        reqs.append(StateEventInvariant(f"R{len(reqs) + 1}", ev, _random_condition(rng, later)))
    return ControlProblem(tuple(auts), tuple(reqs))


def generate_cyclic_rcnms_instance(seed: int, plants: int, requirements: int,
                                   cycles: int = 1, max_states: int = 3) -> ControlProblem:
    """Random RCNMS problem with planted 2-cycles in its dependency graph.

    Each planted cycle is a pair of non-sensor plants whose controllable
    events are guarded by each other's states, in the spirit of the
    two-plant examples with mutual requirements; further requirements are
    added acyclically on top, some pointing into the cycles.
    """
    rng = random.Random(seed)
    cycles = max(1, min(cycles, plants // 2))
    auts = []
    for k in range(plants):
        if k < 2 * cycles:
            kind = rng.choice(["actuator", "actuator", "mixed"])
        else:
            kind = rng.choice(["sensor", "actuator", "mixed"])
        auts.append(_cyclic_plant(rng, f"P{k + 1}", rng.randint(2, max_states), _mixed_kinds(rng, kind)))

    reqs: list[StateEventInvariant] = []
    used: set[str] = set()

    def add(ev: Event, cond: Condition):
        used.add(ev.name)
        reqs.append(StateEventInvariant(f"R{len(reqs) + 1}", ev, cond))

    for c in range(cycles):
        a, b = auts[2 * c], auts[2 * c + 1]
        for src, dst in ((a, b), (b, a)):
            ev = rng.choice(sorted(src.controllable))
            # only sensors outside the cycles may be mentioned: they have no outgoing edges
            extra = [p for p in auts[2 * cycles:] if not p.controllable and rng.random() < 0.4]
            conj = (Literal.ref(dst.name, rng.choice(dst.states)),) + tuple(
                Literal.ref(p.name, rng.choice(p.states), len(p.states) > 1 and rng.random() < 0.3)
                for p in extra[:1])
            add(ev, Condition((conj,)))

    # acyclic extras: plant k only mentions plants before k, so no new cycles arise
    for _ in range(max(0, requirements - len(reqs))):
        k = rng.randrange(2 * cycles, plants) if plants > 2 * cycles else None
        if k is None:
            break
        free = [e for e in sorted(auts[k].controllable) if e.name not in used]
        if not free:
            continue
        targets = auts[:k]
        add(rng.choice(free), _random_condition(rng, targets))
    return ControlProblem(tuple(auts), tuple(reqs))


def generate_random_instance(seed: int, plants: int = 2, max_states: int = 3,
                             requirements: int = 2) -> ControlProblem:
    """Unstructured random problem for differential testing.

    Plants need not be strongly connected or marked, may share events, and
    requirements may restrict uncontrollable events.  Nothing about the
    structural properties is guaranteed.
    """
    rng = random.Random(seed)
    pool = [Event(f"e{i}", rng.random() < 0.5) for i in range(2 * plants + 2)]
    auts = []
    for k in range(plants):
        n = rng.randint(1, max_states)
        states = tuple(f"q{i}" for i in range(n))
        alphabet = rng.sample(pool, rng.randint(1, min(3, len(pool))))
        trans = {}
        for q in states:
            for e in alphabet:
                if rng.random() < 0.7:
                    trans[(q, e)] = rng.choice(states)
        marked = frozenset(q for q in states if rng.random() < 0.4) or frozenset({rng.choice(states)})
        auts.append(Automaton(f"P{k + 1}", states, frozenset(alphabet), trans, states[0], marked))
    used = sorted({e for a in auts for e in a.alphabet})
    reqs = []
    for k in range(rng.randint(0, requirements)):
        ev = rng.choice(used)
        reqs.append(StateEventInvariant(f"R{k + 1}", ev, _random_condition(rng, auts)))
    return ControlProblem(tuple(auts), tuple(reqs))
