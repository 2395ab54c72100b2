import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congest_mwm.graph import (
    GraphError,
    Matching,
    OracleScaleError,
    as_rational,
    is_matching,
    make_instance,
    matching_weight,
    nu_exact,
    opt_exact,
    validate_graph,
)
from oracles import brute_best, random_graph, random_instance

PETERSEN = [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)] + [
    (5 + i, 5 + (i + 2) % 5) for i in range(5)
]


def test_validate_path():
    g = validate_graph(3, [(0, 1), (1, 2)])
    assert g.edges == ((0, 1), (1, 2))
    assert g.adjacency == ((1,), (0, 2), (1,))


@pytest.mark.parametrize(
    "n, edges, msg",
    [(2, [(0, 0)], "loop"), (2, [(0, 1), (1, 0)], "duplicate edge"), (2, [(0, 2)], "out of range")],
)
def test_validate_errors(n, edges, msg):
    with pytest.raises(GraphError, match=msg):
        validate_graph(n, edges)


def test_edges_are_canonical():
    g = validate_graph(4, [(3, 1), (2, 0)])
    assert g.edges == ((0, 2), (1, 3))
    assert g.has_edge(3, 1) and not g.has_edge(0, 1)


def test_is_matching_examples():
    g = validate_graph(3, [(0, 1), (1, 2)])
    assert not is_matching(g, [(0, 1), (1, 2)])
    assert is_matching(g, [(0, 1)])
    assert is_matching(g, [])
    with pytest.raises(GraphError):
        is_matching(g, [(0, 2)])


def test_matching_rejects_shared_vertex():
    with pytest.raises(GraphError):
        Matching.of([(0, 1), (1, 2)])


def test_matching_weight_examples():
    path = make_instance(3, [(0, 1, 1), (1, 2, 4)])
    assert matching_weight(path, Matching()) == 0
    assert matching_weight(path, Matching.of([(1, 2)])) == 4
    c4 = make_instance(4, [(0, 1, 1), (1, 2, 5), (2, 3, 1), (0, 3, 5)])
    assert matching_weight(c4, Matching.of([(1, 2), (0, 3)])) == 10


def test_nu_examples():
    assert nu_exact(validate_graph(3, [(0, 1), (1, 2), (0, 2)])).value == 1
    assert nu_exact(validate_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])).value == 2
    res = nu_exact(validate_graph(10, PETERSEN))
    assert res.value == 5
    assert len(res.matching) == 5


def test_petersen_against_subset_scan():
    # frozen value 5 comes from the independent enumeration
    val, _ = brute_best(PETERSEN)
    assert val == 5


def test_opt_examples():
    path = make_instance(3, [(0, 1, 1), (1, 2, 4)])
    res = opt_exact(path)
    assert res.value == 4 and res.matching == Matching.of([(1, 2)])
    c4 = make_instance(4, [(0, 1, 1), (1, 2, 5), (2, 3, 1), (0, 3, 5)])
    assert opt_exact(c4).value == 10
    assert opt_exact(make_instance(2, [(0, 1, 7)])).value == 7


def test_tie_break_is_lexicographic():
    # a 4-cycle has two maximum matchings; the smaller sorted list wins
    g = validate_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert nu_exact(g).matching.sorted_edges() == [(0, 1), (2, 3)]


def test_scale_bound():
    big = validate_graph(17, [(u, v) for u in range(17) for v in range(u + 1, 17)][:41])
    with pytest.raises(OracleScaleError):
        nu_exact(big)
    # many vertices but few edges is allowed
    assert nu_exact(validate_graph(30, [(0, 1), (2, 3)])).value == 2


def test_weights_must_be_at_least_one():
    with pytest.raises(GraphError):
        make_instance(2, [(0, 1, Fraction(1, 2))])
    with pytest.raises(TypeError):
        as_rational(1.5)


def test_oracles_match_enumeration():
    rng = random.Random(11)
    for _ in range(60):
        inst = random_instance(rng, rng.randint(0, 8))
        val_nu, best_nu = brute_best(inst.graph.edges)
        val_w, best_w = brute_best(inst.graph.edges, inst.weights)
        nu, opt = nu_exact(inst.graph), opt_exact(inst)
        assert (nu.value, nu.matching.sorted_edges()) == (val_nu, best_nu)
        assert (opt.value, opt.matching.sorted_edges()) == (val_w, best_w)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 8), st.integers(0, 10**6))
def test_opt_at_least_min_weight_times_nu(n, seed):
    inst = random_instance(random.Random(seed), n)
    w_min = min(inst.weights.values(), default=Fraction(1))
    assert opt_exact(inst).value >= w_min * nu_exact(inst.graph).value


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6), st.fractions(0, 5))
def test_opt_monotone_under_single_raise(n, seed, bump):
    rng = random.Random(seed)
    inst = random_instance(rng, n)
    if not inst.graph.edges:
        return
    e = rng.choice(inst.graph.edges)
    raised = inst.with_weights({**inst.weights, e: inst.weights[e] + bump})
    assert opt_exact(raised).value >= opt_exact(inst).value


@given(st.fractions(), st.fractions().filter(lambda x: x != 0))
def test_rational_arithmetic_exact(a, b):
    assert (a + b) - b == a
    assert (a * b) / b == a


def test_oracle_result_value_recomputes():
    rng = random.Random(5)
    for _ in range(20):
        g = random_graph(rng, 7)
        res = nu_exact(g)
        assert res.value == len(res.matching) and is_matching(g, res.matching.edges)
