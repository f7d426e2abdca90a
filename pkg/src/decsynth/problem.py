"""Control problems and the structural CNMS / RCNMS property checks.

The checks are purely syntactic over the component models: no product state
space is ever built here.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .automata import Automaton, Event, is_strongly_connected, merge_alphabets
from .errors import AutomatonError, ModelError
from .requirements import StateEventInvariant, condition_plants


@dataclass(frozen=True)
class ControlProblem:
    """A plant given as a collection of automata plus state-event invariants."""

    plants: tuple[Automaton, ...]
    requirements: tuple[StateEventInvariant, ...] = ()

    def __post_init__(self):
        plants = tuple(self.plants)
        requirements = tuple(self.requirements)
        object.__setattr__(self, "plants", plants)
        object.__setattr__(self, "requirements", requirements)
        if not plants:
            raise ModelError("a control problem needs at least one plant")
        dup = [n for n, c in Counter(p.name for p in plants).items() if c > 1]
        if dup:
            raise ModelError(f"duplicate plant names: {', '.join(dup)}")
        dup = [n for n, c in Counter(r.id for r in requirements).items() if c > 1]
        if dup:
            raise ModelError(f"duplicate requirement ids: {', '.join(dup)}")
        try:
            alphabet = {e.name: e for e in merge_alphabets(plants)}
        except AutomatonError as exc:
            raise ModelError(str(exc)) from None
        by_name = {p.name: p for p in plants}
        for r in requirements:
            ev = alphabet.get(r.event.name)
            if ev is None:
                raise ModelError(f"requirement {r.id!r} restricts unknown event {r.event.name!r}")
            if ev.controllable != r.event.controllable:
                raise ModelError(f"requirement {r.id!r} disagrees on the controllability of {ev.name!r}")
            for lit in r.condition.literals():
                if not lit.is_ref:
                    continue
                plant = by_name.get(lit.plant)
                if plant is None:
                    raise ModelError(f"requirement {r.id!r} refers to unknown plant {lit.plant!r}")
                if lit.state not in plant.out:
                    raise ModelError(f"requirement {r.id!r} refers to unknown state {lit.plant}.{lit.state}")

    @property
    def plant_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.plants)

    @cached_property
    def plant_index(self) -> Mapping[str, int]:
        return {p.name: k for k, p in enumerate(self.plants)}

    def plant(self, name: str) -> Automaton:
        return self.plants[self.plant_index[name]]

    def owners(self, event: Event | str) -> list[int]:
        """Indices of the plants whose alphabet contains ``event``."""
        name = event.name if isinstance(event, Event) else event
        return [k for k, p in enumerate(self.plants) if name in p.events_by_name]


class PlantKind(enum.Enum):
    SENSOR = "sensor"
    ACTUATOR = "actuator"
    MIXED = "mixed"


def classify_plant(p: Automaton) -> PlantKind:
    if all(not e.controllable for e in p.alphabet):
        return PlantKind.SENSOR
    if all(e.controllable for e in p.alphabet):
        return PlantKind.ACTUATOR
    return PlantKind.MIXED


def is_product_system(cp: ControlProblem) -> bool:
    seen: set[str] = set()
    for p in cp.plants:
        names = set(p.events_by_name)
        if names & seen:
            return False
        seen |= names
    return True


@dataclass(frozen=True)
class Violation:
    tag: str  # one of P1, P2, P3a .. P3g
    subject: str
    message: str

    def __str__(self):
        return f"{self.tag} [{self.subject}] {self.message}"


@dataclass(frozen=True)
class PropertyReport:
    violations: tuple[Violation, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def tags(self) -> set[str]:
        return {v.tag for v in self.violations}


def _article(word: str) -> str:
    return ("an " if word[0] in "aeiou" else "a ") + word


def _check(cp: ControlProblem, relaxed: bool) -> PropertyReport:
    violations: list[Violation] = []
    notes: list[str] = []

    # P1: pairwise disjoint alphabets
    first_owner: dict[str, str] = {}
    for p in cp.plants:
        shared = sorted(n for n in p.events_by_name if n in first_owner)
        if shared:
            others = sorted({first_owner[n] for n in shared})
            violations.append(Violation(
                "P1", p.name, f"shares events {', '.join(shared)} with {', '.join(others)}"))
        for n in p.events_by_name:
            first_owner.setdefault(n, p.name)

    # P2: strongly connected with a marked state, per component
    for p in cp.plants:
        if not p.marked:
            violations.append(Violation("P2", p.name, "has no marked state"))
        if not is_strongly_connected(p):
            violations.append(Violation("P2", p.name, "is not strongly connected"))

    kinds = {p.name: classify_plant(p) for p in cp.plants}
    per_event = Counter(r.event.name for r in cp.requirements)
    for r in cp.requirements:
        # 3.a holds by construction: requirements are always state-event invariants
        ev = cp.plants[cp.owners(r.event)[0]].event(r.event.name)
        if not ev.controllable:
            violations.append(Violation("P3b", r.id, f"restricts uncontrollable event {ev.name}"))
        if per_event[ev.name] > 1:
            violations.append(Violation("P3c", r.id, f"event {ev.name} is restricted by another requirement"))
        consts = sorted({str(lit) for lit in r.condition.literals() if not lit.is_ref})
        if consts:
            violations.append(Violation(
                "P3d", r.id, f"condition uses boolean constant(s) {', '.join(consts)} instead of state references"))
        for conj in r.condition.disjuncts:
            repeated = sorted(n for n, c in Counter(l.plant for l in conj if l.is_ref).items() if c > 1)
            if repeated:
                violations.append(Violation(
                    "P3e", r.id, f"a conjunction refers more than once to {', '.join(repeated)}"))
        for lit in r.condition.literals():
            if lit.is_ref and len(cp.plant(lit.plant).states) == 1:
                if lit.negated:
                    violations.append(Violation(
                        "P3f", r.id, f"negated literal {lit} on single-state plant {lit.plant}"))
                else:
                    notes.append(f"{r.id}: literal {lit} is always true ({lit.plant} has a single state)")
        if not relaxed:
            non_sensors = sorted((n for n in condition_plants(r) if kinds[n] is not PlantKind.SENSOR),
                                 key=cp.plant_index.__getitem__)
            for n in non_sensors:
                violations.append(Violation(
                    "P3g", r.id, f"condition refers to {n}, {_article(kinds[n].value)} automaton"))
    # one record per (property, subject) pair
    merged: dict[tuple[str, str], list[str]] = {}
    for v in violations:
        merged.setdefault((v.tag, v.subject), []).append(v.message)
    return PropertyReport(
        tuple(Violation(tag, subject, "; ".join(msgs)) for (tag, subject), msgs in merged.items()),
        tuple(dict.fromkeys(notes)))


def check_cnms(cp: ControlProblem) -> PropertyReport:
    """Evaluate P1, P2 and P3a-P3g; one violation per failed (property, subject)."""
    return _check(cp, relaxed=False)


def check_rcnms(cp: ControlProblem) -> PropertyReport:
    """As :func:`check_cnms` without the P3g sensor-only rule."""
    return _check(cp, relaxed=True)


def requirement_owner(cp: ControlProblem, r: StateEventInvariant) -> int:
    owners = cp.owners(r.event)
    if len(owners) != 1:
        names = ", ".join(cp.plants[k].name for k in owners)
        raise ModelError(f"event {r.event.name!r} of requirement {r.id!r} is owned by several plants: {names}")
    return owners[0]

