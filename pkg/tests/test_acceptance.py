"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line (visible with
``pytest -s`` or in the summary of ``pytest -rA``).  Timing limits are
checked on the best of several runs for the sub-millisecond criteria.
"""

import random
import time

import pytest
from hypothesis import given, settings

from decsynth import fixtures
from decsynth.automata import (compose_all, explore, is_controllable, is_nonblocking, is_strongly_connected,
                               is_trim, language_equal, split_state_name)
from decsynth.depgraph import analyze, build_graph
from decsynth.errors import EmptySupervisor
from decsynth.modelio import parse_model, pretty_print
from decsynth.oracle import (blocking_states, exhaustive_supremum, generate_acyclic_rcnms_instance,
                             generate_cnms_instance, generate_cyclic_rcnms_instance, generate_random_instance,
                             requirements_supervised)
from decsynth.problem import ControlProblem, check_cnms, check_rcnms
from decsynth.requirements import compose_plant_with_requirements, requirement_guard
from decsynth.synthesis import Verdict, execute_plan, plan_reduction, sup_cn

from strategies import product_systems, strongly_connected_automata, trim_automata


def report(n, ok, detail=""):
    print(f"[criterion {n:>2}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def best_ms(fn, repeat=200):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best * 1000.0


def names(g, vertices):
    return frozenset(g.names[v] for v in vertices)


def closed_loop(cp):
    return requirements_supervised(cp)


def test_criterion_01_self_guard_composition():
    cp = fixtures.load("self_guard")
    p1, r1 = cp.plants[0], cp.requirements[0]

    def build():
        return compose_plant_with_requirements(p1, [r1], [p1])

    g = build()
    trans = {(q, e.name, t) for (q, e), t in g.transitions.items()}
    expected = {("q1", "a", "q2"), ("q2", "a", "q3"), ("q3", "b", "q2")}
    ms = best_ms(build)
    ok = (set(g.states) == {"q1", "q2", "q3"} and trans == expected and g.initial == "q1"
          and g.marked == {"q1", "q3"} and ms < 1.0)
    report(1, ok, f"states={sorted(g.states)} transitions={sorted(trans)} best={ms:.3f} ms")


def test_criterion_02_mutual_guard_dichotomy():
    cp1, cp2 = fixtures.load("mutual_blocking"), fixtures.load("mutual_live")

    def decide():
        l1, l2 = closed_loop(cp1), closed_loop(cp2)
        plant2 = compose_all(cp2.plants)
        res = sup_cn(cp2)
        return (is_nonblocking(l1), is_nonblocking(l2), is_controllable(l2, plant2),
                res.pruned or not language_equal(res.supervisor, l2))

    blocking1_nb, nb2, ctrl2, pruned2 = decide()
    ms = best_ms(decide)
    ok = not blocking1_nb and nb2 and ctrl2 and not pruned2 and ms < 1.0
    report(2, ok, f"CP1 nonblocking={blocking1_nb} CP2 nonblocking={nb2} controllable={ctrl2} "
                  f"pruned={pruned2} best={ms:.3f} ms")


def test_criterion_03_self_loop_dichotomy():
    blocking = is_nonblocking(closed_loop(fixtures.load("selfloop_blocking")))
    live = is_nonblocking(closed_loop(fixtures.load("selfloop_live")))
    g = build_graph(fixtures.load("selfloop_blocking"))
    has_loop = any(e.init == e.ter for e in g.edges)
    report(3, not blocking and live and has_loop,
           f"'d needs P2.q3' nonblocking={blocking}; 'd needs P2.q4' nonblocking={live}; self-loop={has_loop}")


def test_criterion_04_reduction_sets():
    cp = fixtures.load("two_cycles_joined")
    g = build_graph(cp)
    a = analyze(g)
    phis = {names(g, phi) for phi in a.phis}
    ext = [names(g, v) for v in a.extended]
    w = {names(g, c.vertices) for c in a.partition}
    ok = (phis == {frozenset({"P1", "P2"}), frozenset({"P3", "P4"})}
          and ext == [frozenset({"P1", "P2", "P5", "P6"}), frozenset({"P3", "P4", "P5", "P6"})]
          and w == {frozenset({"P1", "P2", "P3", "P4", "P5", "P6"})}
          and not a.residual)
    report(4, ok, f"Phi={sorted(map(sorted, phis))} V={[sorted(v) for v in ext]} W={sorted(map(sorted, w))}")


def split_partials(cp):
    """The two partial problems of the split-guard variant, built by hand."""
    plants = {p.name: p for p in cp.plants}
    reqs = {r.id: r for r in cp.requirements}
    first = ControlProblem(tuple(plants[n] for n in ("P1", "P2", "P5", "P6")),
                           tuple(reqs[n] for n in ("R1", "R2", "R5'", "R6")))
    second = ControlProblem(tuple(plants[n] for n in ("P3", "P4", "P5", "P6")),
                            tuple(reqs[n] for n in ("R3", "R4", "R5''", "R6")))
    return first, second


def test_criterion_05_split_guard_conflict():
    cp = fixtures.load("split_guard_conflict")
    first, second = split_partials(cp)
    s1, s2 = sup_cn(first, label="S1"), sup_cn(second, label="S2")
    each_nb = is_nonblocking(s1.supervisor) and is_nonblocking(s2.supervisor)
    used1 = {e.name for _, e in s1.supervisor.transitions}
    used2 = {e.name for _, e in s2.supervisor.transitions}
    disables = "j" not in used1 and "j'" in used1 and "j'" not in used2 and "j" in used2
    stuck = blocking_states([s1.supervisor, s2.supervisor])
    p5 = [split_state_name(a, 4)[2] for a, _ in stuck] + [split_state_name(b, 4)[2] for _, b in stuck]
    ok = each_nb and disables and bool(stuck) and set(p5) == {"q10"}
    report(5, ok, f"S1/S2 nonblocking={each_nb} S1 never allows j, S2 never allows j'={disables} "
                  f"blocking states={len(stuck)} P5 there={sorted(set(p5))}")


def _equal_to_closed_loop(cp):
    try:
        sup = sup_cn(cp).supervisor
    except EmptySupervisor:
        return False
    return language_equal(sup, closed_loop(cp))


def test_criterion_06_cnms_needs_no_synthesis():
    t = time.perf_counter()
    rng = random.Random(6)
    failures = []
    for seed in range(100):
        cp = generate_cnms_instance(seed, rng.randint(1, 6), rng.randint(0, 6), max_states=4)
        assert check_cnms(cp).satisfied, seed
        if not _equal_to_closed_loop(cp):
            failures.append(seed)
    elapsed = time.perf_counter() - t
    report(6, not failures and elapsed < 60, f"100 instances, failures={failures} time={elapsed:.2f} s")


def test_criterion_07_acyclic_rcnms_needs_no_synthesis():
    t = time.perf_counter()
    rng = random.Random(7)
    failures = []
    for seed in range(100):
        cp = generate_acyclic_rcnms_instance(seed, rng.randint(1, 6), rng.randint(0, 6), max_states=4)
        assert check_rcnms(cp).satisfied, seed
        assert plan_reduction(cp).verdict in (Verdict.SKIP_BY_ACYCLIC, Verdict.SKIP_BY_CNMS), seed
        if not _equal_to_closed_loop(cp):
            failures.append(seed)
    elapsed = time.perf_counter() - t
    report(7, not failures and elapsed < 60, f"100 instances, failures={failures} time={elapsed:.2f} s")


def test_criterion_08_sectionalized_supervisors_match_monolithic():
    t = time.perf_counter()
    rng = random.Random(8)
    failures, pruned = [], 0
    for seed in range(50):
        n = rng.randint(2, 6)
        cp = generate_cyclic_rcnms_instance(seed, n, rng.randint(2, 6), cycles=rng.randint(1, max(1, n // 2)))
        plan = plan_reduction(cp)
        assert plan.verdict is Verdict.SECTIONALIZE, seed
        try:
            mono = sup_cn(cp, bound=10**5).supervisor
        except EmptySupervisor:
            mono = None
        try:
            parts = execute_plan(cp, plan)
        except EmptySupervisor:
            parts = None
        if mono is None or parts is None:
            if (mono is None) != (parts is None):
                failures.append(seed)
            continue
        pruned += any(r.pruned for r in parts)
        loop = explore(tuple(cp.plants) + tuple(r.supervisor for r in parts),
                       allow=requirement_guard(cp.requirements, cp.plant_names), bound=10**5)
        if not language_equal(loop.to_automaton("closed"), mono):
            failures.append(seed)
    elapsed = time.perf_counter() - t
    report(8, not failures and elapsed < 120,
           f"50 instances ({pruned} with pruning), failures={failures} time={elapsed:.2f} s")


def test_criterion_09_supremum_matches_exhaustive_search():
    t = time.perf_counter()
    failures, kinds = [], {"empty": 0, "pruned": 0, "unpruned": 0}
    checked = 0
    seed = 0
    while checked < 1000:
        seed += 1
        if seed % 2:
            cp = generate_random_instance(seed, plants=seed % 3 + 1, max_states=3)
        else:
            cp = generate_cyclic_rcnms_instance(seed, 2, 2, max_states=3)
        if len(explore(cp.plants, allow=requirement_guard(cp.requirements, cp.plant_names))) > 10:
            continue
        checked += 1
        sup = exhaustive_supremum(cp, 10)
        try:
            res = sup_cn(cp)
        except EmptySupervisor:
            res = None
        if res is None:
            kinds["empty"] += 1
            if sup is not None:
                failures.append(seed)
            continue
        kinds["pruned" if res.pruned else "unpruned"] += 1
        if sup is None or not language_equal(sup, res.supervisor):
            failures.append(seed)
    elapsed = time.perf_counter() - t
    report(9, not failures and elapsed < 300, f"1000 instances {kinds}, failures={failures} time={elapsed:.2f} s")


_lemma_stats = {"trim": 0, "strong": 0}


@settings(max_examples=200, deadline=None, database=None)
@given(product_systems(trim_automata))
def _check_lemma_trim(components):
    _lemma_stats["trim"] += 1
    assert is_trim(compose_all(components))


@settings(max_examples=200, deadline=None, database=None)
@given(product_systems(strongly_connected_automata))
def _check_lemma_strong(components):
    _lemma_stats["strong"] += 1
    assert is_strongly_connected(compose_all(components))


def test_criterion_10_composition_lemmas():
    t = time.perf_counter()
    _check_lemma_trim()
    _check_lemma_strong()
    elapsed = time.perf_counter() - t
    ok = _lemma_stats["trim"] >= 200 and _lemma_stats["strong"] >= 200 and elapsed < 30
    report(10, ok, f"trim cases={_lemma_stats['trim']} strongly connected cases={_lemma_stats['strong']} "
                   f"time={elapsed:.2f} s")


def test_criterion_11_station_shaped_classes():
    cp = fixtures.load("station_cycles")
    plan = plan_reduction(cp)
    sizes = [len(p.plants) for p in plan.partial_problems]
    ok = plan.verdict is Verdict.SECTIONALIZE and sizes == [3, 2, 2, 2, 5]
    report(11, ok, f"verdict={plan.verdict.value} class sizes={sizes} residual={sorted(plan.residual)}")


def test_criterion_12_parser_robustness():
    t = time.perf_counter()
    rng = random.Random(12)
    alphabet = b"plantreqiuvmsc{}:.->/ \n\tTFnodP1q_'\xff\xc3"
    crashes, outcomes = 0, {"problem": 0, "diagnostics": 0}
    for k in range(100_000):
        n = rng.randint(0, 40)
        if k % 2:
            data = bytes(rng.getrandbits(8) for _ in range(n))
        else:
            data = bytes(rng.choice(alphabet) for _ in range(n))
        try:
            result = parse_model(data)
        except Exception:
            crashes += 1
            continue
        if result.ok:
            outcomes["problem"] += 1
        else:
            assert result.errors, data
            assert all(0 <= d.span.start <= d.span.end <= len(data) for d in result.diagnostics), data
            outcomes["diagnostics"] += 1
    roundtrips = []
    for name in fixtures.names():
        cp = fixtures.load(name)
        again = parse_model(pretty_print(cp))
        roundtrips.append(again.ok and again.problem == cp)
    elapsed = time.perf_counter() - t
    ok = crashes == 0 and all(roundtrips)
    report(12, ok, f"100000 inputs, crashes={crashes} {outcomes}; round-trips "
                   f"{sum(roundtrips)}/{len(roundtrips)} fixtures; time={elapsed:.2f} s")


@pytest.fixture(autouse=True, scope="module")
def _banner():
    print()
    yield
