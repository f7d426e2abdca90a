import pytest
from hypothesis import given, settings, strategies as st

from decsynth import fixtures
from decsynth.errors import ModelError
from decsynth.modelio import ERROR, INFO, WARNING, format_plant, load_model, parse_model, pretty_print

PLANT = """plant P1 {
  states q1 q2
  initial q1
  controllable a
  trans q1 - a -> q2
  trans q2 - a -> q1
}
"""


def test_self_guard_round_trip():
    cp = fixtures.load("self_guard")
    text = pretty_print(cp)
    again = parse_model(text)
    assert again.ok and again.problem == cp
    assert pretty_print(again.problem) == text


@pytest.mark.parametrize("name", fixtures.names())
def test_every_fixture_round_trips(name):
    cp = fixtures.load(name)
    assert parse_model(pretty_print(cp)).problem == cp


def test_mutual_blocking_shape():
    cp = fixtures.load("mutual_blocking")
    assert cp.plant_names == ("P1", "P2")
    assert [r.id for r in cp.requirements] == ["R1", "R2"]
    assert str(cp.requirements[0]) == "R1: b needs P2.q4"


def test_unknown_plant_in_condition():
    res = parse_model(PLANT + "requirement r1: a needs P9.q1\n")
    assert not res.ok
    d = res.errors[0]
    assert d.code == "E-UNKNOWN-STATE"
    assert "P9" in d.message and d.span.line == 8


def test_condition_printing():
    cp = fixtures.load("two_cycles_joined")
    lines = [line for line in pretty_print(cp).splitlines() if line.startswith("requirement R5")]
    assert lines == ["requirement R5: j needs P2.q4 or P3.q6"]


def test_no_requirements_prints_no_requirement_lines():
    cp = parse_model(PLANT).problem
    assert "requirement" not in pretty_print(cp)


def test_crlf_and_comments():
    text = ("// header\r\n" + PLANT.replace("\n", "  // trailing\r\n")
            + "requirement R: a needs P1.q1 and not P1.q2 or T\r\n")
    res = parse_model(text)
    assert res.ok
    assert str(res.problem.requirements[0].condition) == "P1.q1 and not P1.q2 or T"


def test_default_marking_is_the_initial_state():
    res = parse_model(PLANT)
    assert res.problem.plants[0].marked == frozenset({"q1"})
    assert [(d.severity, d.code) for d in res.diagnostics] == [(INFO, "I-DEFAULT-MARKED")]


def test_bytes_and_paths(tmp_path):
    f = tmp_path / "m.dcp"
    f.write_bytes(b"\xef\xbb\xbf" + PLANT.encode())
    assert parse_model(f).ok
    assert load_model(f).plant_names == ("P1",)


def test_load_model_raises_with_diagnostics(tmp_path):
    f = tmp_path / "bad.dcp"
    f.write_text("plant {")
    with pytest.raises(ModelError) as info:
        load_model(f)
    assert str(f) in str(info.value)
    assert info.value.diagnostics


def test_format_plant_comments():
    p = parse_model(PLANT).problem.plants[0]
    text = format_plant(p, {"q1": "(a,b)"})
    assert text.startswith("// q1 = (a,b)\nplant P1 {")


BAD = {
    "E-LEX": PLANT + "requirement R: a needs P1.q1 $\n",
    "E-SYNTAX": "plant P1 { states q1 initial }",
    "E-REQ-AUT": PLANT + "requirement R { states x }\n",
    "E-DUP-PLANT": PLANT + PLANT.replace(" a", " b"),
    "E-DUP-STATE": PLANT.replace("states q1 q2", "states q1 q2 q1"),
    "E-UNKNOWN-STATE": PLANT.replace("initial q1", "initial q9"),
    "E-DUP-EVENT": PLANT.replace("controllable a", "controllable a a"),
    "E-EVENT-OWNER": PLANT + PLANT.replace("P1", "P2"),
    "E-NO-EVENTS": "plant P1 {\n  states q1\n  initial q1\n}\n",
    "E-UNKNOWN-EVENT": PLANT + "requirement R: zz needs P1.q1\n",
    "E-NONDET": PLANT.replace("}", "  trans q1 - a -> q1\n}"),
    "E-NO-PLANTS": "// nothing here\n",
    "E-DUP-REQ": PLANT + "requirement R: a needs P1.q1\nrequirement R: a needs P1.q2\n",
    "E-ENCODING": b"plant \xff",
}


@pytest.mark.parametrize("code", sorted(BAD))
def test_each_error_code(code):
    res = parse_model(BAD[code])
    assert not res.ok
    assert code in [d.code for d in res.errors]


def test_duplicate_transition_is_a_warning():
    res = parse_model(PLANT.replace("}", "  trans q1 - a -> q2\n}"))
    assert res.ok
    assert (WARNING, "W-DUP-TRANS") in [(d.severity, d.code) for d in res.diagnostics]


def test_recovery_reports_several_errors():
    text = "plant P1 { states }\nplant P2 { oops }\n" + PLANT
    errs = parse_model(text).errors
    assert len(errs) >= 2
    assert {e.span.line for e in errs} >= {1, 2}


def test_diagnostic_format():
    d = parse_model("plant P1 {").errors[0]
    assert d.format("m.dcp").startswith("m.dcp:1:")
    assert f" {ERROR} " in d.format()


def check_total(src):
    res = parse_model(src)
    n = len(src)
    for d in res.diagnostics:
        assert 0 <= d.span.start <= d.span.end <= n
        assert d.span.line >= 1 and d.span.col >= 1
    assert res.ok == (not res.errors)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=200))
def test_any_bytes_parse_without_crashing(data):
    check_total(data)


tokens = st.sampled_from(["plant", "requirement", "states", "initial", "marked", "controllable",
                          "uncontrollable", "trans", "needs", "and", "or", "not", "T", "F", "P1", "q1",
                          "a", "{", "}", ":", ".", "-", "->", "\n", "//c\n", "#"])


@settings(max_examples=300, deadline=None)
@given(st.lists(tokens, max_size=40))
def test_token_soup_parses_without_crashing(parts):
    check_total(" ".join(parts))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(fixtures.names()), st.data())
def test_mutated_fixtures_parse_without_crashing(name, data):
    text = fixtures.text(name)
    i = data.draw(st.integers(0, len(text)))
    j = data.draw(st.integers(i, min(len(text), i + 20)))
    junk = data.draw(st.text(alphabet="{}:.->abq1PT \n", max_size=10))
    check_total(text[:i] + junk + text[j:])
