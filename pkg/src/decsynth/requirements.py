"""State-event invariant requirements: ``event needs condition``.

A condition is a disjunction of conjunctions of literals, where a literal is
a (possibly negated) reference ``P.q`` to a plant state, or one of the
constants ``T`` / ``F``.  Only DNF is representable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .automata import Automaton, Event, accessible, split_state_name
from .errors import AutomatonError, ModelError


class LiteralKind(enum.Enum):
    STATE_REF = "ref"
    TRUE = "T"
    FALSE = "F"


@dataclass(frozen=True)
class Literal:
    kind: LiteralKind
    plant: str | None = None
    state: str | None = None
    negated: bool = False

    def __post_init__(self):
        if self.kind is LiteralKind.STATE_REF:
            if not self.plant or not self.state:
                raise ModelError("a state reference needs a plant and a state")
        elif self.plant is not None or self.state is not None or self.negated:
            raise ModelError("boolean literals carry no plant, state or negation")

    @classmethod
    def ref(cls, plant: str, state: str, negated: bool = False) -> "Literal":
        return cls(LiteralKind.STATE_REF, plant, state, negated)

    @classmethod
    def true(cls) -> "Literal":
        return cls(LiteralKind.TRUE)

    @classmethod
    def false(cls) -> "Literal":
        return cls(LiteralKind.FALSE)

    @property
    def is_ref(self) -> bool:
        return self.kind is LiteralKind.STATE_REF

    def __str__(self):
        if self.kind is LiteralKind.TRUE:
            return "T"
        if self.kind is LiteralKind.FALSE:
            return "F"
        return f"{'not ' if self.negated else ''}{self.plant}.{self.state}"


@dataclass(frozen=True)
class Condition:
    disjuncts: tuple[tuple[Literal, ...], ...]

    def __post_init__(self):
        disjuncts = tuple(tuple(conj) for conj in self.disjuncts)
        if not disjuncts or any(not conj for conj in disjuncts):
            raise ModelError("a condition needs at least one non-empty conjunction")
        object.__setattr__(self, "disjuncts", disjuncts)

    @classmethod
    def of(cls, *disjuncts: Sequence[Literal]) -> "Condition":
        return cls(tuple(tuple(d) for d in disjuncts))

    def literals(self) -> Iterable[Literal]:
        for conj in self.disjuncts:
            yield from conj

    def __str__(self):
        return " or ".join(" and ".join(str(lit) for lit in conj) for conj in self.disjuncts)


TRUE_CONDITION = Condition(((Literal.true(),),))


@dataclass(frozen=True)
class StateEventInvariant:
    id: str
    event: Event
    condition: Condition

    def __str__(self):
        return f"{self.id}: {self.event.name} needs {self.condition}"


@dataclass(frozen=True)
class GlobalState:
    """Assignment of a current state to every plant of a composed system."""

    assignment: Mapping[str, str]

    def __getitem__(self, plant: str) -> str:
        return self.assignment[plant]

    def __contains__(self, plant: str) -> bool:
        return plant in self.assignment


def decode_state(name: str, plants: Sequence[Union[Automaton, str]]) -> GlobalState:
    """Map a composed-state name back onto the plants, positionally."""
    names = [p.name if isinstance(p, Automaton) else p for p in plants]
    parts = split_state_name(name, len(names))
    return GlobalState(dict(zip(names, parts)))


def eval_condition(c: Condition, gs: Union[GlobalState, Mapping[str, str]]) -> bool:
    for conj in c.disjuncts:
        for lit in conj:
            if lit.kind is LiteralKind.TRUE:
                continue
            if lit.kind is LiteralKind.FALSE:
                break
            if lit.plant not in gs:
                raise ModelError(f"condition refers to unknown plant {lit.plant!r}")
            if (gs[lit.plant] == lit.state) == lit.negated:
                break
        else:
            return True
    return False


def restricted_event(r: StateEventInvariant) -> Event:
    return r.event


def condition_plants(r: StateEventInvariant) -> set[str]:
    return {lit.plant for lit in r.condition.literals() if lit.is_ref}


# Positional form used on hot paths: each conjunction is a tuple of
# (plant index, state, negated); constant-true literals are dropped and a
# conjunction containing F is dropped entirely.
CompiledCondition = tuple[tuple[tuple[int, str, bool], ...], ...]


def compile_condition(c: Condition, plant_index: Mapping[str, int]) -> CompiledCondition:
    out = []
    for conj in c.disjuncts:
        lits = []
        for lit in conj:
            if lit.kind is LiteralKind.FALSE:
                break
            if lit.kind is LiteralKind.STATE_REF:
                if lit.plant not in plant_index:
                    raise ModelError(f"condition refers to unknown plant {lit.plant!r}")
                lits.append((plant_index[lit.plant], lit.state, lit.negated))
        else:
            out.append(tuple(lits))
    return tuple(out)


def eval_compiled(c: CompiledCondition, state: Sequence[str]) -> bool:
    for conj in c:
        for k, q, neg in conj:
            if (state[k] == q) == neg:
                break
        else:
            return True
    return False


def requirement_guard(requirements: Iterable[StateEventInvariant],
                      plant_names: Sequence[str]) -> Callable[[tuple, Event], bool]:
    """Transition filter for product exploration over the given plant order.

    A transition labelled with a restricted event survives iff every
    requirement on that event holds in the source state.
    """
    index = {name: k for k, name in enumerate(plant_names)}
    table: dict[str, list[CompiledCondition]] = {}
    for r in requirements:
        table.setdefault(r.event.name, []).append(compile_condition(r.condition, index))

    def allow(state, event):
        conds = table.get(event.name)
        if not conds:
            return True
        return all(eval_compiled(c, state) for c in conds)

    return allow


def compose_plant_with_requirements(p: Automaton, rs: Iterable[StateEventInvariant],
                                    plants: Sequence[Union[Automaton, str]]) -> Automaton:
    """Remove every transition whose event is restricted by a violated requirement.

    ``p`` must be a composition of ``plants`` (in that order) so that its
    state names decode positionally into global states.
    """
    rs = list(rs)
    names = [q.name if isinstance(q, Automaton) else q for q in plants]
    for r in rs:
        if r.event.name not in p.events_by_name:
            raise AutomatonError(f"requirement {r.id!r} restricts {r.event.name!r}, foreign to {p.name!r}")
    allow = requirement_guard(rs, names)
    decoded = {q: split_state_name(q, len(names)) for q in p.states}
    trans = {(q, e): t for (q, e), t in p.transitions.items() if allow(decoded[q], e)}
    return accessible(Automaton(p.name, p.states, p.alphabet, trans, p.initial, p.marked))
