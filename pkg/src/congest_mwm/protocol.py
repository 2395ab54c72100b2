"""The constant-round distributed reduction and the unweighted oracles.

Round 1 is the only communication: every node sends its id to each
neighbour. The smaller endpoint of an edge owns it. In round 2 owners round
their edges to powers of ``tau``; in round 3 to powers of ``x``; in round 4
every node replays the epsilon schedule locally and halts. Edge weights
never travel, since each endpoint already knows the weights of its own edges.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping

from .congest import (
    DEFAULT_POLY_BOUND_EXP,
    Message,
    Network,
    RoundReport,
    decode_value,
    encode_value,
    run_rounds,
)
from .graph import Edge, Graph, Matching, WeightedInstance, canonical_edge, nu_exact
from .reduction.algorithms import reference_roundings
from .reduction.rounding import ladder_size_bound, round_weight_to_power
from .reduction.schedule import ladder_schedule
from .reduction.transforms import epsilon_decay, snap_epsilon

REDUCTION_ROUNDS = 4


class ProtocolMismatch(RuntimeError):
    """Nodes disagree with each other or with the sequential reference."""


@dataclass(frozen=True)
class LocalPlan:
    """Everything a node derives from the shared constants alone."""

    eps: Fraction
    eps1: Fraction
    tau: Fraction
    r: int
    eps_loop_entry: Fraction  # budget when the x rounding happens
    classes: int  # class count t at that point
    x: Fraction | None
    eps2: Fraction | None
    top: int | None


def local_plan(eps: Fraction, W: Fraction) -> LocalPlan:
    eps1 = eps / 2
    tau = 1 / (1 - eps1)
    r, _ = round_weight_to_power(W, tau)
    values = [tau**j for j in range(r + 1)]
    e = eps1
    # cheap-gap merges on the known ladder values
    while len(values) > 1 and (values[1] - values[0]) / values[0] <= e / len(values):
        e = epsilon_decay(e, len(values))
        values.pop(0)
    t = len(values)
    if t == 1:
        return LocalPlan(eps, eps1, tau, r, e, 1, None, None, None)
    x = 1 / (1 - e / t)
    top = ladder_size_bound(values[-1], x)
    return LocalPlan(eps, eps1, tau, r, e, t, x, epsilon_decay(e, t), top)


def local_epsilon_schedule(
    t2: int, eps2: Fraction, base: Fraction, raise_cap: int | None = None
) -> tuple[Fraction, Fraction, int]:
    """Replay the raise/merge loop over ladder ``0..t2``; no graph access.

    Returns ``(raw, snapped, force_merge_count)``.
    """
    sched = ladder_schedule(base, t2, eps2, raise_cap)
    _, snapped = snap_epsilon(sched.epsilon_raw)
    return sched.epsilon_raw, snapped, sched.force_merge_count


@dataclass(frozen=True)
class _ReductionState:
    node: int
    local: Mapping[int, Fraction]
    constants: Mapping[str, Any]
    neighbour_ids: tuple[int, ...] = ()
    tau_weights: Mapping[int, Fraction] = field(default_factory=dict)
    x_weights: Mapping[int, Fraction] = field(default_factory=dict)
    plan: LocalPlan | None = None
    eps_raw: Fraction | None = None
    eps_snapped: Fraction | None = None
    force_merges: int | None = None


class ReductionProgram:
    """Node program of the four-round reduction."""

    def init(self, node: int, local: Mapping[int, Any], constants: Mapping[str, Any]):
        return _ReductionState(node, dict(local), constants)

    def step(self, state: _ReductionState, round_index: int, inbox: Mapping[int, Message]):
        c = state.constants
        n = c["n"]
        if round_index == 1:
            payload = encode_value(state.node, n)
            return state, {u: payload for u in state.local}, False
        if round_index == 2:
            ids = []
            for u, msg in inbox.items():
                if decode_value(msg.payload, n) != u:
                    raise ProtocolMismatch(f"node {state.node} got a wrong id from {u}")
                ids.append(u)
            plan = local_plan(c["epsilon"], c["W"])
            owned = {u: w for u, w in state.local.items() if state.node < u}
            tau_w = {u: round_weight_to_power(w, plan.tau)[1] for u, w in owned.items()}
            return replace(state, neighbour_ids=tuple(ids), plan=plan, tau_weights=tau_w), {}, False
        if round_index == 3:
            plan = state.plan
            if plan.x is None:
                return state, {}, False
            x_w = {u: round_weight_to_power(w, plan.x)[1] for u, w in state.tau_weights.items()}
            return replace(state, x_weights=x_w), {}, False
        plan = state.plan
        if plan.x is None:
            raw, forced = plan.eps_loop_entry, 0
            _, snapped = snap_epsilon(raw)
        else:
            raw, snapped, forced = local_epsilon_schedule(
                plan.top, plan.eps2, plan.x, c.get("raise_cap")
            )
        return replace(state, eps_raw=raw, eps_snapped=snapped, force_merges=forced), {}, True


@dataclass(frozen=True)
class ProtocolReport:
    rounds_used: int
    communication_rounds: int
    tau_weights: Mapping[Edge, Fraction]
    x_weights: Mapping[Edge, Fraction]
    epsilon_unweighted: Fraction
    epsilon_snapped: Fraction
    agreement: bool
    force_merge_count: int
    loop_classes: int | None
    capacity: int
    round_reports: tuple[RoundReport, ...]

    @property
    def max_message_bits(self) -> int:
        return max((r.max_payload_bits for r in self.round_reports), default=0)

    @property
    def messages_sent(self) -> int:
        return sum(r.messages_sent for r in self.round_reports)


def reduction_network(
    inst: WeightedInstance,
    eps: Fraction | None = None,
    raise_cap: int | None = None,
    poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP,
    capacity_factor: int = 2,
) -> Network:
    constants = {
        "n": inst.graph.n,
        "epsilon": inst.epsilon if eps is None else Fraction(eps),
        "W": inst.max_weight(),
        "poly_bound_exp": poly_bound_exp,
        "raise_cap": raise_cap,
    }
    return Network(inst.graph, dict(inst.weights), constants, capacity_factor)


def run_distributed_reduction(
    net: Network,
    eps: Fraction | None = None,
    W: Fraction | None = None,
    raise_cap: int | None = None,
    *,
    check_reference: bool = True,
) -> ProtocolReport:
    """Simulate the reduction and audit it against the sequential engine.

    Arguments given here override the network's shared constants.

    Raises:
        ProtocolMismatch: if nodes disagree on the budget, or a rounded
            weight or the budget differs from the sequential reference.
    """
    constants = dict(net.constants)
    constants.setdefault("n", net.graph.n)
    if eps is not None:
        constants["epsilon"] = Fraction(eps)
    if W is not None:
        constants["W"] = Fraction(W)
    if raise_cap is not None:
        constants["raise_cap"] = raise_cap
    constants.setdefault("W", max(net.weights.values(), default=Fraction(1)))
    net = replace(net, constants=constants)
    states, reports = run_rounds(net, ReductionProgram(), REDUCTION_ROUNDS)

    tau_w: dict[Edge, Fraction] = {}
    x_w: dict[Edge, Fraction] = {}
    for s in states:
        for u, w in s.tau_weights.items():
            tau_w[canonical_edge(s.node, u)] = w
        for u, w in s.x_weights.items():
            x_w[canonical_edge(s.node, u)] = w
    outcomes = {(s.eps_raw, s.eps_snapped, s.force_merges) for s in states}
    agreement = len(outcomes) <= 1
    if not agreement:
        raise ProtocolMismatch("nodes computed different budgets")
    if states:
        raw, snapped, forced = outcomes.pop()
        plan = states[0].plan
    else:
        plan = local_plan(constants["epsilon"], constants["W"])
        raw, snapped, forced = plan.eps_loop_entry, snap_epsilon(plan.eps_loop_entry)[1], 0
    report = ProtocolReport(
        rounds_used=len(reports),
        communication_rounds=sum(1 for r in reports if r.messages_sent),
        tau_weights=tau_w,
        x_weights=x_w,
        epsilon_unweighted=raw,
        epsilon_snapped=snapped,
        agreement=agreement,
        force_merge_count=forced,
        loop_classes=None if plan.top is None else plan.top + 1,
        capacity=net.capacity,
        round_reports=tuple(reports),
    )
    if check_reference:
        _check_reference(net, constants, report)
    return report


def _check_reference(net: Network, constants: Mapping[str, Any], report: ProtocolReport) -> None:
    inst = WeightedInstance(net.graph, dict(net.weights), constants["epsilon"])
    if inst.max_weight() != constants["W"]:
        # nodes were given a different W; the reference sizes from the true one
        raise ProtocolMismatch("shared W differs from the largest weight")
    tau_inst, x_inst, trace = reference_roundings(inst, constants["epsilon"], constants.get("raise_cap"))
    if dict(tau_inst.weights) != dict(report.tau_weights):
        raise ProtocolMismatch("tau-rounded weights differ from the sequential reference")
    expected_x = {} if x_inst is None else dict(x_inst.weights)
    if expected_x != dict(report.x_weights):
        raise ProtocolMismatch("x-rounded weights differ from the sequential reference")
    if (trace.epsilon_unweighted_raw, trace.force_merge_count) != (
        report.epsilon_unweighted,
        report.force_merge_count,
    ):
        raise ProtocolMismatch("budget differs from the sequential reference")


# -- unweighted oracles ------------------------------------------------------


@dataclass(frozen=True)
class _GreedyState:
    node: int
    rank: tuple[int, ...]
    available: frozenset[int]
    partner: int | None = None
    target: int | None = None


class GreedyProgram:
    """Maximal matching by mutual proposals.

    Odd rounds: an unmatched node drops neighbours that announced a match,
    then proposes (payload ``0``) to its best available neighbour, best
    meaning lowest rank. Even rounds: mutual proposals match, and the new
    partners announce it (payload ``1``) to their other neighbours and halt.
    The globally best active node always gets matched, so each phase makes
    progress.
    """

    def init(self, node: int, local: Mapping[int, Any], constants: Mapping[str, Any]):
        return _GreedyState(node, constants["rank"], frozenset(local))

    def step(self, state: _GreedyState, round_index: int, inbox: Mapping[int, Message]):
        if round_index % 2 == 1:
            gone = {u for u, m in inbox.items() if m.payload == "1"}
            available = state.available - gone
            if not available:
                return replace(state, available=available, target=None), {}, True
            target = min(available, key=lambda u: state.rank[u])
            return replace(state, available=available, target=target), {target: "0"}, False
        if state.target is not None and state.target in inbox:
            partner = state.target
            others = {u: "1" for u in sorted(state.available) if u != partner}
            return replace(state, partner=partner, target=None), others, True
        return replace(state, target=None), {}, False


def distributed_greedy_matching(net: Network, seed: int | None = None) -> Matching:
    """Maximal matching via :class:`GreedyProgram`.

    Without a seed, ranks are node ids. With a seed, ranks come from a
    seeded random permutation shared by all nodes.
    """
    n = net.graph.n
    if seed is None:
        rank = tuple(range(n))
    else:
        order = random.Random(seed).sample(range(n), n)
        rank = tuple(sorted(range(n), key=order.__getitem__))
    net = replace(net, constants={**net.constants, "rank": rank})
    states, _ = run_rounds(net, GreedyProgram(), 2 * (n // 2 + 1) + 1)
    edges = {canonical_edge(s.node, s.partner) for s in states if s.partner is not None}
    return Matching(frozenset(edges))


EXACT = "exact-centralized"
GREEDY = "greedy-distributed"


@dataclass(frozen=True)
class UnweightedOracle:
    """A cardinality-matching oracle usable by the reduction.

    ``guarantee`` is the oracle's own epsilon: the exact variant is optimal,
    the greedy one returns a maximal matching (at least half of optimal).
    """

    variant: str = EXACT
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.variant not in (EXACT, GREEDY):
            raise ValueError(f"unknown oracle variant {self.variant!r}")

    @classmethod
    def named(cls, name: str, seed: int | None = None) -> UnweightedOracle:
        return cls({"exact": EXACT, "greedy": GREEDY}.get(name, name), seed)

    @property
    def guarantee(self) -> Fraction:
        return Fraction(0) if self.variant == EXACT else Fraction(1, 2)

    @property
    def short_name(self) -> str:
        return "exact" if self.variant == EXACT else "greedy"

    def __call__(self, g: Graph, eps: Fraction) -> Matching:
        return run_unweighted_oracle(self, g, eps)


def run_unweighted_oracle(oracle: UnweightedOracle, g: Graph, eps: Fraction) -> Matching:
    """Run ``oracle`` on ``g``. The exact variant ignores ``eps``."""
    if oracle.variant == EXACT:
        return nu_exact(g).matching
    return distributed_greedy_matching(Network(g), oracle.seed)
