"""Deterministic finite automata with a controllable/uncontrollable alphabet.

Everything here is explicit-state.  Automata are immutable values; the
synchronous composition only ever materialises the reachable part of the
cartesian product, and all fixed points are computed with FIFO worklists so
that state numbering and diagnostics are reproducible from run to run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import AutomatonError, SizeBoundExceeded


@dataclass(frozen=True, order=True)
class Event:
    """An event label.  Two events are the same event iff their names match."""

    name: str
    controllable: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise AutomatonError(f"event name must be a non-empty string, got {self.name!r}")

    def __str__(self):
        return self.name


def state_name(parts: Sequence[str]) -> str:
    """Canonical name of a composed state: ``"(s1,...,sn)"``; bare name for n = 1."""
    if len(parts) == 1:
        return parts[0]
    return "(" + ",".join(parts) + ")"


def split_state_name(name: str, arity: int) -> tuple[str, ...]:
    """Inverse of :func:`state_name` for a known number of components."""
    if arity == 1:
        if name.startswith("(") and name.endswith(")") and "," not in name:
            return (name[1:-1],)
        return (name,)
    if not (name.startswith("(") and name.endswith(")")):
        raise AutomatonError(f"state {name!r} is not a {arity}-tuple")
    parts = tuple(name[1:-1].split(","))
    if len(parts) != arity:
        raise AutomatonError(f"state {name!r} has {len(parts)} components, expected {arity}")
    return parts


@dataclass(frozen=True)
class Automaton:
    """A five-tuple (states, alphabet, partial transition function, initial, marked).

    ``transitions`` maps ``(state, event)`` to the target state.  The event in
    a key may be given as an :class:`Event` or as an event name; names are
    resolved against ``alphabet`` on construction.
    """

    name: str
    states: tuple[str, ...]
    alphabet: frozenset[Event]
    transitions: Mapping[tuple[str, Event], str]
    initial: str
    marked: frozenset[str]

    def __post_init__(self):
        states = tuple(self.states)
        alphabet = frozenset(self.alphabet)
        if not states:
            raise AutomatonError(f"automaton {self.name!r} has no states")
        if len(set(states)) != len(states):
            raise AutomatonError(f"automaton {self.name!r} lists a state twice")
        if not alphabet:
            raise AutomatonError(f"automaton {self.name!r} has an empty alphabet")
        by_name = {e.name: e for e in alphabet}
        state_set = set(states)
        if self.initial not in state_set:
            raise AutomatonError(f"initial state {self.initial!r} of {self.name!r} is not a state")
        marked = frozenset(self.marked)
        if not marked <= state_set:
            raise AutomatonError(f"marked states {sorted(marked - state_set)} of {self.name!r} are not states")

        trans = {}
        for (src, ev), dst in self.transitions.items():
            ev_name = ev.name if isinstance(ev, Event) else ev
            event = by_name.get(ev_name)
            if event is None:
                raise AutomatonError(f"transition label {ev_name!r} not in the alphabet of {self.name!r}")
            if isinstance(ev, Event) and ev.controllable != event.controllable:
                raise AutomatonError(f"event {ev_name!r} used with inconsistent controllability")
            if src not in state_set or dst not in state_set:
                raise AutomatonError(f"transition {src!r} -{ev_name}-> {dst!r} leaves the state set of {self.name!r}")
            if trans.setdefault((src, event), dst) != dst:
                raise AutomatonError(f"nondeterministic transitions from {src!r} on {ev_name!r}")

        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "marked", marked)
        object.__setattr__(self, "transitions", MappingProxyType(trans))

    @cached_property
    def events_by_name(self) -> Mapping[str, Event]:
        return MappingProxyType({e.name: e for e in sorted(self.alphabet)})

    @cached_property
    def out(self) -> Mapping[str, Mapping[Event, str]]:
        """Outgoing transitions per state, in event-name order."""
        table = {q: {} for q in self.states}
        for (src, ev), dst in sorted(self.transitions.items(), key=lambda kv: (kv[0][1].name,)):
            table[src][ev] = dst
        return MappingProxyType(table)

    @property
    def controllable(self) -> frozenset[Event]:
        return frozenset(e for e in self.alphabet if e.controllable)

    @property
    def uncontrollable(self) -> frozenset[Event]:
        return frozenset(e for e in self.alphabet if not e.controllable)

    def event(self, name: str) -> Event:
        try:
            return self.events_by_name[name]
        except KeyError:
            raise AutomatonError(f"event {name!r} not in the alphabet of {self.name!r}") from None

    def __repr__(self):
        return (f"Automaton({self.name!r}, {len(self.states)} states, "
                f"{len(self.alphabet)} events, {len(self.transitions)} transitions)")


def step(aut: Automaton, q: str, e) -> Optional[str]:
    """Target of the transition from ``q`` labelled ``e``, or ``None`` if undefined."""
    if q not in aut.out:
        raise AutomatonError(f"state {q!r} is foreign to {aut.name!r}")
    event = aut.event(e.name if isinstance(e, Event) else e)
    return aut.out[q].get(event)


def run(aut: Automaton, events: Iterable) -> Optional[str]:
    """Replay a string of events from the initial state; ``None`` once undefined."""
    q = aut.initial
    for e in events:
        q = step(aut, q, e)
        if q is None:
            return None
    return q


def merge_alphabets(auts: Iterable[Automaton]) -> frozenset[Event]:
    seen: dict[str, Event] = {}
    for aut in auts:
        for e in aut.alphabet:
            other = seen.setdefault(e.name, e)
            if other.controllable != e.controllable:
                raise AutomatonError(
                    f"event {e.name!r} is controllable in one automaton and uncontrollable in another")
    return frozenset(seen.values())


class Product:
    """Reachable part of a synchronous product, indexed by integers.

    ``states[i]`` is the tuple of component states; ``succ[i]`` maps each
    enabled event to the successor index.  State 0 is the initial state.
    """

    __slots__ = ("components", "alphabet", "states", "index", "succ")

    def __init__(self, components, alphabet, states, index, succ):
        self.components = components
        self.alphabet = alphabet
        self.states = states
        self.index = index
        self.succ = succ

    def __len__(self):
        return len(self.states)

    def is_marked(self, i: int) -> bool:
        return all(s in c.marked for s, c in zip(self.states[i], self.components))

    def predecessors(self) -> list[list[tuple[int, Event]]]:
        pred: list[list[tuple[int, Event]]] = [[] for _ in self.states]
        for i, row in enumerate(self.succ):
            for e, j in row.items():
                pred[j].append((i, e))
        return pred

    def coreachable(self, alive=None) -> list[bool]:
        """Indices that can reach a marked state, optionally within ``alive``."""
        pred = self.predecessors()
        ok = [False] * len(self.states)
        queue = deque()
        for i in range(len(self.states)):
            if (alive is None or alive[i]) and self.is_marked(i):
                ok[i] = True
                queue.append(i)
        while queue:
            j = queue.popleft()
            for i, _ in pred[j]:
                if not ok[i] and (alive is None or alive[i]):
                    ok[i] = True
                    queue.append(i)
        return ok

    def path_to(self, target: int) -> list[Event]:
        """Shortest event string from the initial state to ``target`` (BFS parents)."""
        parent: dict[int, tuple[int, Event]] = {}
        seen = {0}
        queue = deque([0])
        while queue and target not in seen:
            i = queue.popleft()
            for e, j in self.succ[i].items():
                if j not in seen:
                    seen.add(j)
                    parent[j] = (i, e)
                    queue.append(j)
        if target not in seen:
            raise AutomatonError(f"state index {target} is unreachable")
        path = []
        while target != 0:
            target, e = parent[target]
            path.append(e)
        return path[::-1]

    def to_automaton(self, name: str, keep=None) -> Automaton:
        keep = range(len(self.states)) if keep is None else keep
        keep = [i for i in keep]
        kept = set(keep)
        names = {i: state_name(self.states[i]) for i in keep}
        trans = {(names[i], e): names[j]
                 for i in keep for e, j in self.succ[i].items() if j in kept}
        return Automaton(
            name=name,
            states=tuple(names[i] for i in keep),
            alphabet=self.alphabet,
            transitions=trans,
            initial=names[0],
            marked=frozenset(names[i] for i in keep if self.is_marked(i)),
        )


def explore(components: Sequence[Automaton],
            allow: Optional[Callable[[tuple, Event], bool]] = None,
            bound: Optional[int] = None) -> Product:
    """Breadth-first construction of the reachable synchronous product.

    ``allow(state_tuple, event)`` may veto individual transitions, which is
    how state-event invariants are applied during exploration.
    """
    components = tuple(components)
    if not components:
        raise AutomatonError("cannot compose an empty collection of automata")
    alphabet = merge_alphabets(components)
    rank = {e: r for r, e in enumerate(sorted(alphabet))}
    owners: dict[Event, tuple[int, ...]] = {
        e: tuple(k for k, c in enumerate(components) if e in c.alphabet) for e in alphabet}
    outs = [c.out for c in components]

    init = tuple(c.initial for c in components)
    states = [init]
    index = {init: 0}
    succ: list[dict[Event, int]] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = states[i]
        candidates = set()
        for k, q in enumerate(s):
            candidates.update(outs[k][q])
        row = {}
        for e in sorted(candidates, key=rank.__getitem__):
            t = list(s)
            for k in owners[e]:
                nxt = outs[k][s[k]].get(e)
                if nxt is None:
                    break
                t[k] = nxt
            else:
                if allow is not None and not allow(s, e):
                    continue
                t = tuple(t)
                j = index.get(t)
                if j is None:
                    j = len(states)
                    if bound is not None and j >= bound:
                        raise SizeBoundExceeded(bound)
                    index[t] = j
                    states.append(t)
                    queue.append(j)
                row[e] = j
        succ.append(row)
    return Product(components, alphabet, states, index, succ)


def compose(g1: Automaton, g2: Automaton) -> Automaton:
    """Synchronous composition: synchronise on shared events, interleave the rest."""
    return explore((g1, g2)).to_automaton(f"{g1.name}||{g2.name}")


def compose_all(auts: Sequence[Automaton], bound: Optional[int] = None) -> Automaton:
    """Composition of a collection; composed states are flat n-tuples."""
    auts = tuple(auts)
    if len(auts) == 1:
        return auts[0]
    return explore(auts, bound=bound).to_automaton("||".join(a.name for a in auts))


def restrict(aut: Automaton, keep: Iterable[str], name: Optional[str] = None) -> Automaton:
    """Sub-automaton induced by ``keep`` (which must contain the initial state)."""
    kept = set(keep)
    return Automaton(
        name=name or aut.name,
        states=tuple(q for q in aut.states if q in kept),
        alphabet=aut.alphabet,
        transitions={(q, e): t for (q, e), t in aut.transitions.items() if q in kept and t in kept},
        initial=aut.initial,
        marked=aut.marked & kept,
    )


def reachable_states(aut: Automaton) -> set[str]:
    seen = {aut.initial}
    queue = deque([aut.initial])
    while queue:
        q = queue.popleft()
        for t in aut.out[q].values():
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def coreachable_states(aut: Automaton) -> set[str]:
    pred: dict[str, list[str]] = {q: [] for q in aut.states}
    for (src, _), dst in aut.transitions.items():
        pred[dst].append(src)
    seen = set(q for q in aut.states if q in aut.marked)
    queue = deque(q for q in aut.states if q in aut.marked)
    while queue:
        q = queue.popleft()
        for p in pred[q]:
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def accessible(aut: Automaton) -> Automaton:
    """Restriction to the reachable states."""
    reach = reachable_states(aut)
    if len(reach) == len(aut.states):
        return aut
    return restrict(aut, reach)


def is_nonblocking(aut: Automaton) -> bool:
    return reachable_states(aut) <= coreachable_states(aut)


def is_trim(aut: Automaton) -> bool:
    n = len(aut.states)
    return len(reachable_states(aut)) == n and len(coreachable_states(aut)) == n


def is_strongly_connected(aut: Automaton) -> bool:
    # one forward and one backward sweep from any pivot settles it
    pivot = aut.states[0]
    forward = {pivot}
    queue = deque([pivot])
    while queue:
        for t in aut.out[queue.popleft()].values():
            if t not in forward:
                forward.add(t)
                queue.append(t)
    if len(forward) != len(aut.states):
        return False
    pred: dict[str, list[str]] = {q: [] for q in aut.states}
    for (src, _), dst in aut.transitions.items():
        pred[dst].append(src)
    backward = {pivot}
    queue = deque([pivot])
    while queue:
        for p in pred[queue.popleft()]:
            if p not in backward:
                backward.add(p)
                queue.append(p)
    return len(backward) == len(aut.states)


def is_controllable(k: Automaton, g: Automaton) -> bool:
    """Whether L(K) is controllable with respect to L(G) (same alphabet required)."""
    if {e.name for e in k.alphabet} != {e.name for e in g.alphabet}:
        raise AutomatonError(f"alphabets of {k.name!r} and {g.name!r} differ")
    return controllability_witness(k, g) is None


def controllability_witness(k: Automaton, g: Automaton) -> Optional[list[Event]]:
    """A string ``s u`` with s in L(K), su in L(G) \\ L(K), u uncontrollable; else None."""
    start = (k.initial, g.initial)
    parent: dict[tuple[str, str], tuple] = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        qk, qg = pair
        out_k = k.out[qk]
        for e, tg in g.out[qg].items():
            tk = out_k.get(e)
            if tk is None:
                if not e.controllable:
                    path = [e]
                    while parent[pair] is not None:
                        pair, ev = parent[pair]
                        path.append(ev)
                    return path[::-1]
                continue
            nxt = (tk, tg)
            if nxt not in parent:
                parent[nxt] = (pair, e)
                queue.append(nxt)
    return None


def language_difference(a: Automaton, b: Automaton, marked: bool = True) -> Optional[list[Event]]:
    """A shortest string in L(a) but not L(b) (or marked by one only); None if none.

    Events are matched by name, so the alphabets need not coincide.
    """
    start = (a.initial, b.initial)
    parent: dict[tuple[str, str], tuple] = {start: None}
    queue = deque([start])

    def trace(pair, last=None):
        path = [] if last is None else [last]
        while parent[pair] is not None:
            pair, ev = parent[pair]
            path.append(ev)
        return path[::-1]

    while queue:
        pair = queue.popleft()
        qa, qb = pair
        if marked and ((qa in a.marked) != (qb in b.marked)):
            return trace(pair)
        out_b = {e.name: t for e, t in b.out[qb].items()}
        for e, ta in a.out[qa].items():
            tb = out_b.get(e.name)
            if tb is None:
                return trace(pair, e)
            nxt = (ta, tb)
            if nxt not in parent:
                parent[nxt] = (pair, e)
                queue.append(nxt)
    return None


def language_included(a: Automaton, b: Automaton) -> bool:
    """L(a) ⊆ L(b) and Lm(a) ⊆ Lm(b)."""
    start = (a.initial, b.initial)
    seen = {start}
    queue = deque([start])
    while queue:
        qa, qb = queue.popleft()
        if qa in a.marked and qb not in b.marked:
            return False
        out_b = {e.name: t for e, t in b.out[qb].items()}
        for e, ta in a.out[qa].items():
            tb = out_b.get(e.name)
            if tb is None:
                return False
            if (ta, tb) not in seen:
                seen.add((ta, tb))
                queue.append((ta, tb))
    return True


def language_equal(a: Automaton, b: Automaton, marked: bool = True) -> bool:
    """Equality of generated (and, by default, marked) languages of two DFAs."""
    return (language_difference(a, b, marked) is None
            and language_difference(b, a, marked) is None)
