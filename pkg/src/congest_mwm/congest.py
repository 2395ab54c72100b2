"""Synchronous CONGEST simulator with per-message bit accounting.

Every vertex is a processor running the same :class:`NodeProgram`. In round
``r`` each live node reads the messages sent to it in round ``r - 1``, updates
its state and sends at most one bit string to each neighbour. A message
longer than the network capacity ``B = c * ceil(log2 max(n, 2))`` aborts the
run with :class:`CapacityError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Protocol

from .graph import Edge, Graph

DEFAULT_CAPACITY_FACTOR = 2
DEFAULT_POLY_BOUND_EXP = 3


class CapacityError(RuntimeError):
    """A payload exceeded the message capacity."""

    def __init__(self, node: int, neighbor: int, round_index: int, bits: int, capacity: int):
        super().__init__(
            f"node {node} sent {bits} bits to {neighbor} in round {round_index}"
            f" (capacity {capacity})"
        )
        self.node = node
        self.neighbor = neighbor
        self.round_index = round_index
        self.bits = bits
        self.capacity = capacity


class EncodingError(ValueError):
    """A value does not fit its declared field."""


def _log2_ceil(n: int) -> int:
    return (n - 1).bit_length()


def message_capacity(n: int, c: int = DEFAULT_CAPACITY_FACTOR) -> int:
    if n < 1 or c < 1:
        raise ValueError("message capacity needs n >= 1 and c >= 1")
    return c * _log2_ceil(max(n, 2))


def id_width(n: int) -> int:
    return max(1, _log2_ceil(max(n, 2)))


def rational_field_width(n: int, poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP) -> int:
    return max(1, _log2_ceil(max(n, 2) ** poly_bound_exp))


def encode_value(
    v: int | Fraction, n: int, poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP
) -> str:
    """Fixed-width encoding of a node id (an ``int``) or a ``Fraction``.

    Ids take ``ceil(log2 n)`` bits. A rational ``p/q`` takes two fields of
    ``ceil(log2 n**E)`` bits each, and both ``p`` and ``q`` must be at most
    ``n**E`` and fit the field.
    """
    if isinstance(v, Fraction):
        width = rational_field_width(n, poly_bound_exp)
        bound = max(n, 2) ** poly_bound_exp
        for part in (v.numerator, v.denominator):
            if part < 0 or part > bound or part >= 1 << width:
                raise EncodingError(f"{v} exceeds the bound n**{poly_bound_exp} = {bound}")
        return format(v.numerator, f"0{width}b") + format(v.denominator, f"0{width}b")
    if isinstance(v, int) and not isinstance(v, bool):
        if not (0 <= v < max(n, 1)):
            raise EncodingError(f"node id {v} out of range for n={n}")
        return format(v, f"0{id_width(n)}b")
    raise TypeError(f"cannot encode {v!r}")


def decode_value(
    bits: str, n: int, kind: str = "id", poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP
) -> int | Fraction:
    if kind == "id":
        if len(bits) != id_width(n):
            raise EncodingError(f"id field must be {id_width(n)} bits, got {len(bits)}")
        return int(bits, 2)
    if kind == "rational":
        width = rational_field_width(n, poly_bound_exp)
        if len(bits) != 2 * width:
            raise EncodingError(f"rational field must be {2 * width} bits, got {len(bits)}")
        return Fraction(int(bits[:width], 2), int(bits[width:], 2))
    raise ValueError(f"unknown field kind {kind!r}")


@dataclass(frozen=True)
class Message:
    payload: str
    capacity: int

    def __post_init__(self) -> None:
        if any(ch not in "01" for ch in self.payload):
            raise EncodingError("payload must be a bit string")
        if len(self.payload) > self.capacity:
            raise EncodingError(f"payload of {len(self.payload)} bits over capacity {self.capacity}")

    @property
    def bits(self) -> int:
        return len(self.payload)


@dataclass(frozen=True)
class Network:
    """A graph whose vertices are processors.

    ``weights`` are private inputs: node ``v`` sees only the weights of its
    incident edges. ``constants`` are shared by every node.
    """

    graph: Graph
    weights: Mapping[Edge, Fraction] = field(default_factory=dict)
    constants: Mapping[str, Any] = field(default_factory=dict)
    capacity_factor: int = DEFAULT_CAPACITY_FACTOR

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def capacity(self) -> int:
        return message_capacity(max(self.graph.n, 1), self.capacity_factor)

    def local_input(self, v: int) -> dict[int, Fraction | None]:
        """Neighbour id -> weight of the connecting edge (None if unweighted)."""
        out = {}
        for u in self.graph.adjacency[v]:
            e = (min(u, v), max(u, v))
            out[u] = self.weights.get(e)
        return out


@dataclass(frozen=True)
class RoundReport:
    round_index: int
    messages_sent: int
    max_payload_bits: int
    total_bits: int


class NodeProgram(Protocol):
    def init(self, node: int, local: Mapping[int, Any], constants: Mapping[str, Any]) -> Any: ...

    def step(
        self, state: Any, round_index: int, inbox: Mapping[int, Message]
    ) -> tuple[Any, Mapping[int, str], bool]: ...


def run_rounds(
    net: Network, prog: NodeProgram, max_rounds: int
) -> tuple[list[Any], list[RoundReport]]:
    """Execute ``prog`` in lock step for at most ``max_rounds`` rounds.

    Inboxes are ordered by neighbour id. Execution stops early once every
    node has halted.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be nonnegative")
    g = net.graph
    cap = net.capacity
    states = [prog.init(v, net.local_input(v), net.constants) for v in range(g.n)]
    halted = [False] * g.n
    pending: list[dict[int, Message]] = [{} for _ in range(g.n)]
    reports: list[RoundReport] = []
    for r in range(1, max_rounds + 1):
        if all(halted):
            break
        delivered = pending
        pending = [{} for _ in range(g.n)]
        sent = 0
        max_bits = 0
        total = 0
        for v in range(g.n):
            if halted[v]:
                continue
            inbox = dict(sorted(delivered[v].items()))
            state, outbox, stop = prog.step(states[v], r, inbox)
            states[v] = state
            for u in sorted(outbox):
                payload = outbox[u]
                if not g.has_edge(v, u):
                    raise ValueError(f"node {v} addressed non-neighbour {u} in round {r}")
                if len(payload) > cap:
                    raise CapacityError(v, u, r, len(payload), cap)
                pending[u][v] = Message(payload, cap)
                sent += 1
                total += len(payload)
                max_bits = max(max_bits, len(payload))
            halted[v] = bool(stop)
        reports.append(RoundReport(r, sent, max_bits, total))
    return states, reports
