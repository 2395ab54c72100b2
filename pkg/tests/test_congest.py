from fractions import Fraction

import pytest

from congest_mwm.congest import (
    CapacityError,
    EncodingError,
    Network,
    decode_value,
    encode_value,
    message_capacity,
    run_rounds,
)
from congest_mwm.graph import validate_graph


@pytest.mark.parametrize("n, c, B", [(16, 2, 8), (2, 2, 2), (1000, 2, 20), (1, 3, 3)])
def test_message_capacity(n, c, B):
    assert message_capacity(n, c) == B


def test_encode_examples():
    assert encode_value(5, 16) == "0101"
    bits = encode_value(Fraction(21, 20), 16)
    assert len(bits) == 24 and bits[:12] == format(21, "012b")
    assert decode_value(bits, 16, "rational") == Fraction(21, 20)
    with pytest.raises(EncodingError):
        encode_value(Fraction(16**3 + 1, 2), 16)
    with pytest.raises(EncodingError):
        encode_value(16, 16)


def test_encode_roundtrip_ids():
    for n in (2, 3, 16, 17, 64):
        for v in range(n):
            assert decode_value(encode_value(v, n), n) == v


class IdSwap:
    def init(self, node, local, constants):
        return {"node": node, "heard": {}}

    def step(self, state, r, inbox):
        if r == 1:
            return state, {u: encode_value(state["node"], 2) for u in (1 - state["node"],)}, False
        heard = {u: decode_value(m.payload, 2) for u, m in inbox.items()}
        return {**state, "heard": heard}, {}, True


def test_two_node_id_exchange():
    net = Network(validate_graph(2, [(0, 1)]))
    states, reports = run_rounds(net, IdSwap(), 5)
    assert states[0]["heard"] == {1: 1} and states[1]["heard"] == {0: 0}
    assert [r.messages_sent for r in reports] == [2, 0]


class Shouter:
    def __init__(self, bits):
        self.bits = bits

    def init(self, node, local, constants):
        return node

    def step(self, state, r, inbox):
        return state, {u: "1" * self.bits for u in (1 - state,)}, False


def test_capacity_violation_names_node_and_round():
    net = Network(validate_graph(2, [(0, 1)]))
    with pytest.raises(CapacityError) as info:
        run_rounds(net, Shouter(net.capacity + 1), 3)
    assert info.value.node == 0 and info.value.round_index == 1
    assert "round 1" in str(info.value)


def test_zero_rounds():
    net = Network(validate_graph(2, [(0, 1)]))
    states, reports = run_rounds(net, IdSwap(), 0)
    assert reports == [] and states[0]["heard"] == {}


class Flood:
    """Every node forwards the largest private value it has seen."""

    def init(self, node, local, constants):
        return (node, constants["secret"][node], ())

    def step(self, state, r, inbox):
        node, best, history = state
        for m in inbox.values():
            best = max(best, int(m.payload, 2))
        out = {u: format(best, "04b") for u in self.adj[node]}
        return (node, best, history + (best,)), out, False


def _flood(secret, rounds=6):
    g = validate_graph(6, [(i, i + 1) for i in range(5)])
    prog = Flood()
    prog.adj = g.adjacency
    states, reports = run_rounds(Network(g, constants={"secret": secret}), prog, rounds)
    return states, reports


def test_determinism():
    a = _flood([1, 2, 3, 4, 5, 0])
    b = _flood([1, 2, 3, 4, 5, 0])
    assert a == b


def test_isolation_by_distance():
    base, _ = _flood([1, 1, 1, 1, 1, 1])
    changed, _ = _flood([1, 1, 1, 1, 1, 9])
    # node 0 is at distance 5 from node 5; its history differs only from round 6
    hist_a, hist_b = base[0][2], changed[0][2]
    assert hist_a[:5] == hist_b[:5] and hist_a[5] != hist_b[5]


def test_reports_within_capacity():
    _, reports = _flood([3, 1, 4, 1, 5, 9])
    assert all(r.max_payload_bits <= message_capacity(6, 2) for r in reports)


def test_non_neighbour_address_rejected():
    class Bad:
        def init(self, node, local, constants):
            return node

        def step(self, state, r, inbox):
            return state, {2: "1"} if state == 0 else {}, True

    with pytest.raises(ValueError, match="non-neighbour"):
        run_rounds(Network(validate_graph(3, [(0, 1), (1, 2)])), Bad(), 1)
