import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congest_mwm.congest import Network, message_capacity
from congest_mwm.graph import Matching, is_matching, make_instance, nu_exact, validate_graph
from congest_mwm.protocol import (
    UnweightedOracle,
    distributed_greedy_matching,
    local_epsilon_schedule,
    local_plan,
    reduction_network,
    run_distributed_reduction,
    run_unweighted_oracle,
)
from congest_mwm.reduction import algorithm2_main, geometric_round_instance, snap_epsilon
from oracles import random_graph

F = Fraction


def test_path_reduction_matches_sequential():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 4)])
    rep = run_distributed_reduction(reduction_network(inst, F(1, 2)))
    assert rep.tau_weights == {(0, 1): 1, (1, 2): F(1024, 243)}
    assert rep.rounds_used == 4 and rep.communication_rounds == 1
    assert [r.messages_sent for r in rep.round_reports] == [4, 0, 0, 0]
    _, trace = algorithm2_main(inst, F(1, 2), lambda g, e: nu_exact(g).matching)
    assert rep.epsilon_unweighted == trace.epsilon_unweighted_raw
    assert rep.epsilon_snapped == trace.epsilon_unweighted_snapped


def test_single_edge_uniform():
    inst = make_instance(2, [(0, 1, 1)])
    rep = run_distributed_reduction(reduction_network(inst, F(1, 2)))
    assert rep.agreement and rep.epsilon_unweighted == F(1, 4) and rep.x_weights == {}
    assert rep.rounds_used == 4


def test_rerun_is_identical():
    inst = make_instance(4, [(0, 1, 3), (1, 2, F(7, 2)), (2, 3, 9)])
    a = run_distributed_reduction(reduction_network(inst, F(1, 4)))
    b = run_distributed_reduction(reduction_network(inst, F(1, 4)))
    assert a == b


def test_messages_fit_capacity():
    rng = random.Random(3)
    for n in (2, 5, 17, 33):
        g = random_graph(rng, n, 0.3)
        inst = make_instance(n, [(u, v, rng.randint(1, 9)) for u, v in g.edges])
        rep = run_distributed_reduction(reduction_network(inst, F(1, 2)))
        assert rep.max_message_bits <= message_capacity(n, 2)


def test_local_schedule_examples():
    assert local_epsilon_schedule(0, F(1, 4), F(2)) == (F(1, 4), F(1, 4), 0)
    base = 1 / (1 - F(1, 4) / 2)
    raw, snapped, forced = local_epsilon_schedule(1, F(1, 4), base)
    # replay of the two-class loop by hand: 1 -> x needs one raise of eps/2
    # (gap 1/7 exceeds 1/8), then the gap is tiny and the class merges
    assert raw == F(1, 4) * F(1, 2) * F(1, 2) and forced == 0
    assert snapped == snap_epsilon(raw)[1]


def test_local_plan_agrees_with_sequential_ladder():
    for eps in (F(1, 2), F(1, 4), F(3, 4)):
        for W in (F(1), F(5, 4), F(4), F(100)):
            plan = local_plan(eps, W)
            inst = make_instance(2, [(0, 1, W)])
            rounded, ladder = geometric_round_instance(inst, plan.tau)
            assert ladder.max_exp == plan.r


def test_greedy_examples():
    tri = validate_graph(3, [(0, 1), (1, 2), (0, 2)])
    assert len(distributed_greedy_matching(Network(tri))) == 1
    path = validate_graph(4, [(0, 1), (1, 2), (2, 3)])
    assert distributed_greedy_matching(Network(path)) == Matching.of([(0, 1), (2, 3)])
    assert distributed_greedy_matching(Network(validate_graph(3, []))) == Matching()


def _is_maximal(g, m):
    used = {v for e in m.edges for v in e}
    return all(u in used or v in used for u, v in g.edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 12), st.integers(0, 10**6), st.one_of(st.none(), st.integers(0, 99)))
def test_greedy_is_maximal(n, seed, greedy_seed):
    g = random_graph(random.Random(seed), n)
    m = distributed_greedy_matching(Network(g), greedy_seed)
    assert is_matching(g, m.edges) and _is_maximal(g, m)
    assert 2 * len(m) >= nu_exact(g).value


def test_unweighted_oracles():
    c4 = validate_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert len(run_unweighted_oracle(UnweightedOracle("exact-centralized"), c4, F(1, 2))) == 2
    star = validate_graph(4, [(0, 1), (0, 2), (0, 3)])
    assert len(run_unweighted_oracle(UnweightedOracle.named("greedy"), star, F(1, 2))) == 1
    assert run_unweighted_oracle(UnweightedOracle(), validate_graph(3, []), F(1, 2)) == Matching()
    assert UnweightedOracle.named("greedy").guarantee == F(1, 2)
    with pytest.raises(ValueError):
        UnweightedOracle("bogus")
