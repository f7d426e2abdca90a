r"""Reader and writer for ``.dcp`` control-problem files.

Grammar::

    model       := (plant | requirement)*
    plant       := "plant" IDENT "{" states events transitions "}"
    states      := "states" IDENT+ ("marked" IDENT+)? "initial" IDENT
    events      := ("controllable" IDENT+)? ("uncontrollable" IDENT+)?
    transitions := ("trans" IDENT "-" IDENT "->" IDENT)*
    requirement := "requirement" IDENT ":" IDENT "needs" dnf
    dnf         := conj ("or" conj)*
    conj        := lit ("and" lit)*
    lit         := "not"? IDENT "." IDENT | "T" | "F"

``//`` starts a comment that runs to the end of the line.  Identifiers are
``[A-Za-z_][A-Za-z0-9_']*``; inside a plant block the section keywords are
reserved.  The parser never raises on bad input: every problem becomes a
:class:`Diagnostic` with a source span, and only error-free input yields a
:class:`ControlProblem`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .automata import Automaton, Event
from .errors import DecSynthError, ModelError
from .problem import ControlProblem
from .requirements import Condition, Literal, StateEventInvariant

ERROR, WARNING, INFO = "error", "warning", "info"

PLANT_KEYWORDS = frozenset({"states", "marked", "initial", "controllable", "uncontrollable", "trans"})
TOP_KEYWORDS = frozenset({"plant", "requirement"})


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    span: Span
    code: str
    message: str

    def format(self, path: str = "<input>") -> str:
        return f"{path}:{self.span}: {self.severity} {self.code}: {self.message}"


@dataclass
class ParseResult:
    problem: Optional[ControlProblem]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.problem is not None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == ERROR]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, "{", "}", ":", ".", "-", "->", EOF
    text: str
    span: Span


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<arrow>->)
  | (?P<punct>[{}:.\-])
""", re.VERBOSE)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = Span(pos, pos + 1, line, pos - line_start + 1)
            diags.append(Diagnostic(ERROR, span, "E-LEX", f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        span = Span(pos, m.end(), line, pos - line_start + 1)
        if kind == "ident":
            tokens.append(Token("IDENT", m.group(), span))
        elif kind in ("arrow", "punct"):
            tokens.append(Token(m.group(), m.group(), span))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = pos + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", Span(len(text), len(text), line, len(text) - line_start + 1)))
    return tokens, diags


# --- syntax tree --------------------------------------------------------------

@dataclass
class Name:
    text: str
    span: Span


@dataclass
class PlantDecl:
    name: Name
    states: list[Name]
    marked: Optional[list[Name]]
    initial: Name
    controllable: list[Name]
    uncontrollable: list[Name]
    transitions: list[tuple[Name, Name, Name]]
    span: Span


@dataclass
class LitDecl:
    kind: str  # "ref", "T", "F"
    span: Span
    plant: Optional[Name] = None
    state: Optional[Name] = None
    negated: bool = False


@dataclass
class RequirementDecl:
    id: Name
    event: Name
    dnf: list[list[LitDecl]]
    span: Span


class _SyntaxError(Exception):
    def __init__(self, token: Token, message: str, code: str = "E-SYNTAX"):
        super().__init__(message)
        self.token = token
        self.code = code


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def is_word(self, word: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.text == word

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise _SyntaxError(self.tok, f"expected {what}, found {describe(self.tok)}")
        return self.advance()

    def expect_word(self, word: str) -> Token:
        if not self.is_word(word):
            raise _SyntaxError(self.tok, f"expected '{word}', found {describe(self.tok)}")
        return self.advance()

    def name(self, what: str, reserved=frozenset()) -> Name:
        t = self.tok
        if t.kind != "IDENT" or t.text in reserved:
            raise _SyntaxError(t, f"expected {what}, found {describe(t)}")
        self.advance()
        return Name(t.text, t.span)

    def names(self, what: str) -> list[Name]:
        out = [self.name(what, PLANT_KEYWORDS)]
        while self.tok.kind == "IDENT" and self.tok.text not in PLANT_KEYWORDS:
            out.append(self.name(what))
        return out

    def error(self, exc: _SyntaxError):
        self.diags.append(Diagnostic(ERROR, exc.token.span, exc.code, str(exc)))

    def recover(self):
        """Skip to the next top-level keyword outside any brace block."""
        depth = 0
        while self.tok.kind != "EOF":
            if self.tok.kind == "{":
                depth += 1
            elif self.tok.kind == "}":
                depth = max(0, depth - 1)
                if depth == 0:
                    self.advance()
                    if self.tok.kind == "IDENT" and self.tok.text in TOP_KEYWORDS:
                        return
                    continue
            elif depth == 0 and self.tok.kind == "IDENT" and self.tok.text in TOP_KEYWORDS:
                return
            self.advance()

    def model(self) -> tuple[list[PlantDecl], list[RequirementDecl]]:
        plants, reqs = [], []
        while self.tok.kind != "EOF":
            start = self.pos
            try:
                if self.is_word("plant"):
                    plants.append(self.plant())
                elif self.is_word("requirement"):
                    req = self.requirement()
                    if req is not None:
                        reqs.append(req)
                else:
                    raise _SyntaxError(self.tok, f"expected 'plant' or 'requirement', found {describe(self.tok)}")
            except _SyntaxError as exc:
                self.error(exc)
                if self.pos == start:
                    self.advance()
                self.recover()
        return plants, reqs

    def plant(self) -> PlantDecl:
        start = self.expect_word("plant").span
        name = self.name("plant name")
        self.expect("{", "'{'")
        self.expect_word("states")
        states = self.names("state name")
        marked = None
        if self.is_word("marked"):
            self.advance()
            marked = self.names("state name")
        self.expect_word("initial")
        initial = self.name("initial state", PLANT_KEYWORDS)
        controllable, uncontrollable = [], []
        if self.is_word("controllable"):
            self.advance()
            controllable = self.names("event name")
        if self.is_word("uncontrollable"):
            self.advance()
            uncontrollable = self.names("event name")
        transitions = []
        while self.is_word("trans"):
            self.advance()
            src = self.name("source state", PLANT_KEYWORDS)
            self.expect("-", "'-'")
            ev = self.name("event name", PLANT_KEYWORDS)
            self.expect("->", "'->'")
            dst = self.name("target state", PLANT_KEYWORDS)
            transitions.append((src, ev, dst))
        end = self.expect("}", "'trans' or '}'").span
        return PlantDecl(name, states, marked, initial, controllable, uncontrollable, transitions,
                         Span(start.start, end.end, start.line, start.col))

    def requirement(self) -> Optional[RequirementDecl]:
        start = self.expect_word("requirement").span
        rid = self.name("requirement name")
        if self.tok.kind != ":":
            # "requirement R { ... }" or "requirement automaton R { ... }"
            look = self.pos
            while self.tokens[look].kind == "IDENT" and self.tokens[look].text not in TOP_KEYWORDS:
                look += 1
            if self.tokens[look].kind == "{":
                self.pos = look
                raise _SyntaxError(
                    self.tok,
                    f"requirement {rid.text} is given as an automaton; only state-event invariants "
                    "'event needs condition' are supported",
                    "E-REQ-AUT")
            raise _SyntaxError(self.tok, f"expected ':', found {describe(self.tok)}")
        self.advance()
        event = self.name("event name")
        self.expect_word("needs")
        dnf = [self.conj()]
        while self.is_word("or"):
            self.advance()
            dnf.append(self.conj())
        end = self.tokens[self.pos - 1].span
        if not (self.tok.kind == "EOF" or (self.tok.kind == "IDENT" and self.tok.text in TOP_KEYWORDS)):
            raise _SyntaxError(self.tok, f"expected 'and', 'or' or end of requirement, found {describe(self.tok)}")
        return RequirementDecl(rid, event, dnf, Span(start.start, end.end, start.line, start.col))

    def conj(self) -> list[LitDecl]:
        lits = [self.lit()]
        while self.is_word("and"):
            self.advance()
            lits.append(self.lit())
        return lits

    def lit(self) -> LitDecl:
        negated = False
        first = self.tok
        if self.is_word("not"):
            self.advance()
            negated = True
        if self.tok.kind == "IDENT" and self.tok.text in ("T", "F") and self.peek().kind != ".":
            t = self.advance()
            if negated:
                raise _SyntaxError(t, "boolean constants cannot be negated")
            return LitDecl(t.text, t.span)
        plant = self.name("plant name or T/F")
        self.expect(".", "'.'")
        state = self.name("state name")
        return LitDecl("ref", Span(first.span.start, state.span.end, first.span.line, first.span.col),
                       plant, state, negated)


def describe(t: Token) -> str:
    if t.kind == "EOF":
        return "end of input"
    return f"'{t.text}'"


# --- validation ------------------------------------------------------------------

def _validate(plants: list[PlantDecl], reqs: list[RequirementDecl], diags: list[Diagnostic],
              eof: Span) -> Optional[ControlProblem]:
    def err(span, code, msg):
        diags.append(Diagnostic(ERROR, span, code, msg))

    automata: list[Automaton] = []
    events: dict[str, tuple[Event, str]] = {}
    states_of: dict[str, set[str]] = {}
    seen_plants: set[str] = set()
    for decl in plants:
        pname = decl.name.text
        if pname in seen_plants:
            err(decl.name.span, "E-DUP-PLANT", f"plant {pname} is declared more than once")
            continue
        seen_plants.add(pname)
        ok = True
        states: list[str] = []
        for s in decl.states:
            if s.text in states:
                err(s.span, "E-DUP-STATE", f"state {s.text} of {pname} is declared more than once")
                ok = False
            else:
                states.append(s.text)
        state_set = set(states)
        states_of[pname] = state_set
        if decl.marked is None:
            marked = {decl.initial.text}
            diags.append(Diagnostic(INFO, decl.name.span, "I-DEFAULT-MARKED",
                                    f"no marked states given for {pname}; marking the initial state"))
        else:
            marked = set()
            for s in decl.marked:
                if s.text not in state_set:
                    err(s.span, "E-UNKNOWN-STATE", f"marked state {s.text} is not a state of {pname}")
                    ok = False
                marked.add(s.text)
        if decl.initial.text not in state_set:
            err(decl.initial.span, "E-UNKNOWN-STATE", f"initial state {decl.initial.text} is not a state of {pname}")
            ok = False

        local: dict[str, Event] = {}
        for names, flag in ((decl.controllable, True), (decl.uncontrollable, False)):
            for n in names:
                if n.text in local:
                    err(n.span, "E-DUP-EVENT", f"event {n.text} is declared more than once in {pname}")
                    ok = False
                    continue
                if n.text in events:
                    err(n.span, "E-EVENT-OWNER",
                        f"event {n.text} is already declared by plant {events[n.text][1]}; events must be owned by one plant")
                    ok = False
                local[n.text] = Event(n.text, flag)
        if not local:
            err(decl.name.span, "E-NO-EVENTS", f"plant {pname} declares no events")
            ok = False
        for n, ev in local.items():
            events.setdefault(n, (ev, pname))

        trans: dict[tuple[str, Event], str] = {}
        for src, ev, dst in decl.transitions:
            for s in (src, dst):
                if s.text not in state_set:
                    err(s.span, "E-UNKNOWN-STATE", f"{s.text} is not a state of {pname}")
                    ok = False
            event = local.get(ev.text)
            if event is None:
                err(ev.span, "E-UNKNOWN-EVENT", f"event {ev.text} is not declared in {pname}")
                ok = False
                continue
            key = (src.text, event)
            if key in trans:
                if trans[key] == dst.text:
                    diags.append(Diagnostic(WARNING, ev.span, "W-DUP-TRANS",
                                            f"duplicate transition {src.text} - {ev.text} -> {dst.text}"))
                else:
                    err(ev.span, "E-NONDET",
                        f"{pname} has two transitions from {src.text} on {ev.text}")
                    ok = False
                continue
            trans[key] = dst.text
        if ok:
            automata.append(Automaton(pname, tuple(states), frozenset(local.values()), trans,
                                      decl.initial.text, frozenset(marked)))

    if not plants:
        err(eof, "E-NO-PLANTS", "a model needs at least one plant")

    requirements: list[StateEventInvariant] = []
    seen_reqs: set[str] = set()
    for decl in reqs:
        ok = True
        if decl.id.text in seen_reqs:
            err(decl.id.span, "E-DUP-REQ", f"requirement {decl.id.text} is declared more than once")
            ok = False
        seen_reqs.add(decl.id.text)
        owner = events.get(decl.event.text)
        if owner is None:
            err(decl.event.span, "E-UNKNOWN-EVENT", f"event {decl.event.text} is not declared by any plant")
            ok = False
        disjuncts = []
        for conj in decl.dnf:
            lits = []
            for lit in conj:
                if lit.kind == "T":
                    lits.append(Literal.true())
                elif lit.kind == "F":
                    lits.append(Literal.false())
                else:
                    pname, sname = lit.plant.text, lit.state.text
                    if pname not in states_of:
                        err(lit.plant.span, "E-UNKNOWN-STATE", f"unknown plant {pname} in {pname}.{sname}")
                        ok = False
                    elif sname not in states_of[pname]:
                        err(lit.state.span, "E-UNKNOWN-STATE", f"{sname} is not a state of {pname}")
                        ok = False
                    lits.append(Literal.ref(pname, sname, lit.negated))
            disjuncts.append(tuple(lits))
        if ok:
            requirements.append(StateEventInvariant(decl.id.text, owner[0], Condition(tuple(disjuncts))))

    if any(d.severity == ERROR for d in diags):
        return None
    try:
        return ControlProblem(tuple(automata), tuple(requirements))
    except DecSynthError as exc:  # pragma: no cover - validation above should catch everything
        err(eof, "E-MODEL", str(exc))
        return None


def parse_model(src: Union[str, bytes, Path]) -> ParseResult:
    """Parse model text (``str``), raw bytes, or a :class:`~pathlib.Path`."""
    if isinstance(src, Path):
        src = src.read_bytes()
    if isinstance(src, bytes):
        try:
            src = src.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = src[:exc.start].count(b"\n") + 1
            span = Span(exc.start, exc.end, line, exc.start - (src.rfind(b"\n", 0, exc.start) + 1) + 1)
            return ParseResult(None, [Diagnostic(ERROR, span, "E-ENCODING", f"input is not UTF-8: {exc.reason}")])
    if src.startswith("﻿"):
        src = " " + src[1:]
    tokens, diags = tokenize(src)
    parser = _Parser(tokens)
    plants, reqs = parser.model()
    diags.extend(parser.diags)
    if any(d.severity == ERROR for d in diags):
        return ParseResult(None, sorted(diags, key=lambda d: d.span.start))
    problem = _validate(plants, reqs, diags, tokens[-1].span)
    return ParseResult(problem, sorted(diags, key=lambda d: d.span.start))


def load_model(path: Union[str, Path]) -> ControlProblem:
    """Parse a file, raising :class:`ModelError` carrying the diagnostics on failure."""
    result = parse_model(Path(path))
    if not result.ok:
        first = result.errors[0] if result.errors else None
        msg = first.format(str(path)) if first else f"{path}: invalid model"
        raise ModelError(msg, result.diagnostics)
    return result.problem


# --- printing -----------------------------------------------------------------

def format_plant(p: Automaton, comments: Optional[dict[str, str]] = None) -> str:
    """One ``plant`` block; ``comments`` may annotate states (printed as ``//`` lines)."""
    lines = []
    if comments:
        for q in p.states:
            if q in comments:
                lines.append(f"// {q} = {comments[q]}")
    lines.append(f"plant {p.name} {{")
    lines.append("  states " + " ".join(p.states))
    marked = [q for q in p.states if q in p.marked]
    if marked:
        lines.append("  marked " + " ".join(marked))
    lines.append(f"  initial {p.initial}")
    ctrl = sorted(e.name for e in p.alphabet if e.controllable)
    unctrl = sorted(e.name for e in p.alphabet if not e.controllable)
    if ctrl:
        lines.append("  controllable " + " ".join(ctrl))
    if unctrl:
        lines.append("  uncontrollable " + " ".join(unctrl))
    order = {q: i for i, q in enumerate(p.states)}
    for (src, ev), dst in sorted(p.transitions.items(), key=lambda kv: (order[kv[0][0]], kv[0][1].name)):
        lines.append(f"  trans {src} - {ev.name} -> {dst}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pretty_print(cp: ControlProblem) -> str:
    """Canonical text: plants in order, then requirements in order, LF line ends."""
    blocks = [format_plant(p) for p in cp.plants]
    out = "\n".join(blocks)
    if cp.requirements:
        out += "\n" + "".join(f"requirement {r}\n" for r in cp.requirements)
    return out
