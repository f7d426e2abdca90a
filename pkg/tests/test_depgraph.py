import re

import pytest
from hypothesis import given, settings, strategies as st

from decsynth import fixtures
from decsynth.depgraph import (BLUE, PURPLE, RED, DependencyGraph, Edge, analyze, build_graph, cyclic_sccs,
                               dropped_negations, emit_dot, extend, is_acyclic_selfloop_free, quotient,
                               simplify_partial_problem, strongly_connected_components)
from decsynth.errors import ModelError
from decsynth.requirements import Literal


def label(g, vs):
    return frozenset(g.names[v] for v in vs)


def test_two_target_guard_graph():
    g = build_graph(fixtures.load("two_target_guard"))
    assert g.names == ("P1", "P2", "P3")
    assert [(e.init, e.ter) for e in g.edges] == [(0, 1), (0, 2)]


def test_mutual_pair_is_a_two_cycle():
    cp = fixtures.load("mutual_blocking")
    g = build_graph(cp)
    assert {(e.init, e.ter, e.requirement) for e in g.edges} == {(0, 1, "R1"), (1, 0, "R2")}
    assert not is_acyclic_selfloop_free(g)
    assert not is_acyclic_selfloop_free(build_graph(fixtures.load("mutual_live")))


def test_acyclic_five():
    g = build_graph(fixtures.load("acyclic_five"))
    assert is_acyclic_selfloop_free(g)
    assert {(g.names[e.init], g.names[e.ter]) for e in g.edges} == {
        ("P1", "P2"), ("P1", "P3"), ("P1", "P5"), ("P3", "P5"), ("P2", "P4")}


def test_self_loop_counts_as_cyclic():
    g = build_graph(fixtures.load("selfloop_live"))
    assert not is_acyclic_selfloop_free(g)
    assert [label(g, phi) for phi in cyclic_sccs(g)] == [frozenset({"P2"})]
    a = analyze(g)
    assert [label(g, w.vertices) for w in a.partition] == [frozenset({"P1", "P2"})]


def test_joined_cycles_analysis():
    g = build_graph(fixtures.load("two_cycles_joined"))
    a = analyze(g)
    assert [label(g, p) for p in a.phis] == [frozenset({"P1", "P2"}), frozenset({"P3", "P4"})]
    assert label(g, extend(g, a.phis[0])) == {"P1", "P2", "P5", "P6"}
    assert label(g, extend(g, a.phis[1])) == {"P3", "P4", "P5", "P6"}
    assert [label(g, w.vertices) for w in a.partition] == [frozenset({"P1", "P2", "P3", "P4", "P5", "P6"})]
    assert a.residual == frozenset()


def test_station_cycles_have_disjoint_classes():
    g = build_graph(fixtures.load("station_cycles"))
    a = analyze(g)
    assert [len(p) for p in a.phis] == [2, 2, 2, 2, 5]
    assert [len(w.vertices) for w in a.partition] == [3, 2, 2, 2, 5]
    assert all(len(w.members) == 1 for w in a.partition)
    assert label(g, a.phis[4]) == {"P58", "P59", "P60", "P61", "P62"}
    assert label(g, a.partition[0].vertices) == {"P21", "P22", "P23"}
    assert label(g, a.residual) == {"S1", "S2", "A1"}


def test_simplify_keeps_everything():
    cp = fixtures.load("two_cycles_joined")
    assert simplify_partial_problem(cp, range(6)) == cp


def test_simplify_replaces_dropped_literals():
    cp = fixtures.load("two_cycles_joined")
    part = simplify_partial_problem(cp, [4, 5])
    reqs = {r.id: r for r in part.requirements}
    assert set(reqs) == {"R5", "R6"}
    assert str(reqs["R5"].condition) == "T or T"
    assert reqs["R6"] == {r.id: r for r in cp.requirements}["R6"]


def test_simplify_out_of_range():
    with pytest.raises(ModelError):
        simplify_partial_problem(fixtures.load("two_cycles_joined"), [7])


def test_dropped_negations_are_reported():
    cp = fixtures.load("acyclic_five")
    assert dropped_negations(cp, [0]) == []
    cp = fixtures.load("two_target_guard")
    notes = dropped_negations(cp, [0, 1])
    assert len(notes) == 1 and "not P3.q1" in notes[0]


def test_dot_plain():
    g = build_graph(fixtures.load("two_target_guard"))
    dot = emit_dot(g)
    assert dot.startswith('digraph "dependencies" {')
    assert len(re.findall(r"^\s+\"P\d\";$", dot, re.M)) == 3
    assert len(re.findall(r"->", dot)) == 2
    assert 'id="e1"' in dot and 'id="e2"' in dot


def test_dot_colours():
    g = build_graph(fixtures.load("two_cycles_joined"))
    dot = emit_dot(g, analyze(g))
    nodes = [line for line in dot.splitlines() if "->" not in line and "color" in line]
    assert sum(RED in n for n in nodes) == 4
    assert sum(PURPLE in n for n in nodes) == 2
    assert sum(BLUE in n for n in nodes) == 0


def test_dot_residual_is_blue():
    g = build_graph(fixtures.load("station_cycles"))
    dot = emit_dot(g, analyze(g))
    blue = [line for line in dot.splitlines() if BLUE in line]
    assert len(blue) == 3


def test_quotient_merges_transitively():
    sets = [frozenset({1, 2}), frozenset({5}), frozenset({2, 3}), frozenset({3, 4})]
    classes = quotient(sets)
    assert [w.vertices for w in classes] == [frozenset({1, 2, 3, 4}), frozenset({5})]


graphs = st.integers(1, 7).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12)))


def reach(n, edges, v):
    seen, stack = {v}, [v]
    while stack:
        u = stack.pop()
        for a, b in edges:
            if a == u and b not in seen:
                seen.add(b)
                stack.append(b)
    return seen


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_scc_matches_mutual_reachability(data):
    n, edges = data
    succ = [[b for a, b in edges if a == v] for v in range(n)]
    comps = strongly_connected_components(n, succ)
    assert sorted(v for c in comps for v in c) == list(range(n))
    closure = [reach(n, edges, v) for v in range(n)]
    for c in comps:
        for u in c:
            for v in range(n):
                assert (v in c) == (v in closure[u] and u in closure[v])


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_partition_covers_all_extended_sets(data):
    n, edges = data
    g = DependencyGraph(tuple(f"P{k}" for k in range(n)), tuple(Edge(a, b, "R") for a, b in edges))
    a = analyze(g)
    covered = set().union(*(w.vertices for w in a.partition)) if a.partition else set()
    assert covered | a.residual == set(range(n))
    assert not covered & a.residual
    for vs in a.extended:
        assert sum(vs <= w.vertices for w in a.partition) == 1
    for i, w in enumerate(a.partition):
        for u in a.partition[i + 1:]:
            assert not w.vertices & u.vertices
    # every edge ending in a class starts in the same class
    for e in g.edges:
        for w in a.partition:
            if e.ter in w.vertices:
                assert e.init in w.vertices
    assert (not a.phis) == is_acyclic_selfloop_free(g)


def test_literal_true_is_used_for_dropped_plants():
    cp = fixtures.load("two_target_guard")
    part = simplify_partial_problem(cp, [0, 1])
    lits = list(part.requirements[0].condition.literals())
    assert lits[1] == Literal.true()
