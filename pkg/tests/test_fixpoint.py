from collections import Counter

import numpy as np
import pytest

from oracles import recursive_strategy
from weakorder.domain import (AssignAdd, AssignConst, EquationSystem, Interval,
                              POS_INF)
from weakorder.fixpoint import (CountMap, LeakError, is_post_fixpoint,
                                kleene_dag, solve_concurrent, solve_sequential,
                                trace_schedule, widening_points)
from weakorder.generators import random_digraph, random_system, wide_diamond
from weakorder.graph import DirectedGraph
from weakorder.wpo import construct_wpo_bu
from weakorder.wto import construct_wto_bu

# A two-variable program on G1 whose concurrent run iterates C3 three times
# and C6 twice, the firing pattern of the worked example (found by search).
G1_STATEMENTS = {1: AssignConst("x", 0), 2: AssignConst("y", 0),
                 3: AssignAdd("x", "x", -1), 4: AssignAdd("y", "x", 1),
                 5: AssignConst("x", 0), 6: AssignAdd("x", "y", -1),
                 9: AssignAdd("y", "y", -1)}
G1_FIRINGS = {"1": 1, "2": 1, "3": 3, "4": 3, "x3": 3, "5": 1, "x2": 1, "10": 1,
              "6": 2, "7": 2, "8": 2, "x6": 2, "9": 2}


def g1_system(g1):
    return EquationSystem(g1, ("x", "y"), {k - 1: s for k, s in G1_STATEMENTS.items()}, 0)


def g2_system(g2):
    return EquationSystem(g2, ("x",), {0: AssignConst("x", 0), 3: AssignAdd("x", "x", 1),
                                      5: AssignAdd("x", "x", 1)}, 0)


def test_fig1_x7(fig1_program):
    g = fig1_program.graph
    seq = solve_sequential(fig1_program, construct_wto_bu(g))
    assert seq.env(7) == {"x": Interval(0, POS_INF)}
    wpo = construct_wpo_bu(g)
    for workers in (1, 2, 4):
        assert solve_concurrent(fig1_program, wpo, workers) == seq
    assert "7: x=[0,+inf]\n" in seq.dump()


def test_fig1_matches_oracle(fig1_program):
    wto = construct_wto_bu(fig1_program.graph)
    seq = solve_sequential(fig1_program, wto)
    ref = recursive_strategy(fig1_program, str(wto))
    assert {v: seq.env(v) for v in seq.values} == ref


def test_straight_line_is_exact():
    g = DirectedGraph(3, [(0, 1), (1, 2)], 0)
    s = EquationSystem(g, ("x",), {1: AssignConst("x", 0), 2: AssignAdd("x", "x", 1)}, 0)
    r = solve_sequential(s, construct_wto_bu(g))
    assert r.env(1) == {"x": Interval(0, 0)} and r.env(2) == {"x": Interval(1, 1)}
    assert solve_concurrent(s, construct_wpo_bu(g), 1) == r


def test_widening_points(g1, fig1a):
    w1 = construct_wpo_bu(g1)
    assert {g1.label(h) for h in widening_points(w1)} == {"2", "3", "6"}
    assert widening_points(construct_wpo_bu(fig1a)) == {2, 4}
    assert widening_points(construct_wpo_bu(DirectedGraph(2, [(0, 1)], 0))) == set()


def test_g1_firing_counts(g1):
    s = g1_system(g1)
    w = construct_wpo_bu(g1)
    log = trace_schedule(s, w, workers=0)
    assert Counter(w.label(f.node) for f in log) == Counter(G1_FIRINGS)
    seq = solve_sequential(s, construct_wto_bu(g1))
    assert solve_concurrent(s, w, 4) == seq


def test_g2_count_resets(g2):
    s = g2_system(g2)
    w = construct_wpo_bu(g2)
    four, x3, x2 = 3, w.exit_of(2), w.exit_of(1)
    assert w.num_outer_sched_preds(four, x3) == 2
    assert w.num_outer_sched_preds(four, x2) == 1
    log = trace_schedule(s, w, workers=0)
    fails = [f for f in log if f.rule == "CompNotStabilized"]
    assert [(f.node, f.resets[four]) for f in fails] == [(x3, 2), (x2, 1)]
    # the lock-step replay reproduces the worked example's schedule
    steps = {}
    for f in log:
        steps.setdefault(f.step, []).append(w.label(f.node))
    assert [sorted(v) for v in steps.values()] == [
        ["1"], ["2", "6"], ["3", "5"], ["4"], ["x3"], ["3"], ["4"], ["x3"], ["x2"],
        ["2"], ["3", "5"], ["4"], ["x3"], ["x2"]]


def test_trace_of_dag_fires_each_node_once():
    g = random_digraph(10, 0.3, 3)
    while not g.is_acyclic():
        g = g.without_edges([tuple(g.edges[-1])])
    s = EquationSystem(g, ("x",), {}, 0)
    log = trace_schedule(s, construct_wpo_bu(g), workers=2, seed=4)
    assert sorted(f.node for f in log) == list(range(10))


def test_trace_seeded_replay_is_repeatable(g1):
    s = g1_system(g1)
    w = construct_wpo_bu(g1)
    a = trace_schedule(s, w, workers=2, seed=11)
    assert a == trace_schedule(s, w, workers=2, seed=11)
    # values are unaffected by the schedule
    assert {f.node for f in a} == {f.node for f in trace_schedule(s, w, 0)}


def test_mismatched_wpo_rejected(g1, g2):
    with pytest.raises(ValueError):
        solve_concurrent(g1_system(g1), construct_wpo_bu(g2), 2)
    with pytest.raises(ValueError):
        solve_sequential(g1_system(g1), construct_wto_bu(g2))
    with pytest.raises(ValueError):
        solve_concurrent(g1_system(g1), construct_wpo_bu(g1), 0)


def test_count_map_guards():
    c = CountMap(np.array([1, 0]))
    assert c.bump(0)
    with pytest.raises(AssertionError):
        c.bump(0)
    with pytest.raises(AssertionError):
        c.reset(1, 1)


def test_leak_detector_catches_broken_wpo(g1):
    w = construct_wpo_bu(g1)
    x6, six, five = w.exit_of(5), 5, 4
    sched = [e for e in w.scheduling.tolist() if tuple(e) != (x6, five)] + [[six, five]]
    broken = w.with_relations(scheduling=sched)
    s = g1_system(g1)
    solve_concurrent(s, w, 1, check_leaks=True)
    with pytest.raises(LeakError):
        solve_concurrent(s, broken, 1, check_leaks=True)


@pytest.mark.parametrize("seed", range(60))
def test_random_systems(seed):
    s = random_system(seed, max_vertices=25, max_vars=3)
    g = s.graph
    wto = construct_wto_bu(g)
    wpo = construct_wpo_bu(g)
    seq = solve_sequential(s, wto)
    assert is_post_fixpoint(seq) == []
    ref = recursive_strategy(s, str(wto))
    assert {v: seq.env(v) for v in seq.values} == ref
    for workers in (1, 3):
        assert solve_concurrent(s, wpo, workers, check_leaks=True).dump() == seq.dump()


@pytest.mark.parametrize("seed", range(20))
def test_acyclic_systems_are_exact(seed):
    s = random_system(seed + 500, max_vertices=20)
    g = s.graph
    dag = DirectedGraph(g.vertex_count, [e for e in g.edges.tolist() if e[0] < e[1]], 0)
    s = EquationSystem(dag, s.variables, s.transfer, 0)
    exact = kleene_dag(s)
    assert solve_concurrent(s, construct_wpo_bu(dag), 2) == exact
    assert solve_sequential(s, construct_wto_bu(dag)) == exact


def test_kleene_rejects_cycles(fig1_program):
    with pytest.raises(ValueError):
        kleene_dag(fig1_program)


def test_wide_diamond_values():
    s = wide_diamond(4, 3)
    r = solve_concurrent(s, construct_wpo_bu(s.graph), 4)
    assert r.env(s.graph.vertex_count - 1) == {"x": Interval(3, 12)}


def test_engine_propagates_errors(fig1_program):
    class Boom(Exception):
        pass

    def bad(v, values):
        raise Boom

    wpo = construct_wpo_bu(fig1_program.graph)
    fig1_program.evaluate, saved = bad, fig1_program.evaluate
    try:
        with pytest.raises(Boom):
            solve_concurrent(fig1_program, wpo, 3)
    finally:
        fig1_program.evaluate = saved
