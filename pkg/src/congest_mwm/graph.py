"""Graph, weight and matching types, plus exact matching oracles.

Weights are :class:`fractions.Fraction` values (numerator and denominator
are unbounded Python integers), so every computation in this package is
exact. The oracles are exponential-time and intended for small instances
only; they serve as ground truth for everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

Edge = tuple[int, int]

# Hard scale limit of the exact oracles: n <= MAX_ORACLE_VERTICES or
# m <= MAX_ORACLE_EDGES.
MAX_ORACLE_VERTICES = 16
MAX_ORACLE_EDGES = 40


class GraphError(ValueError):
    """Raised for malformed graphs, instances or matchings."""


class OracleScaleError(ValueError):
    """Raised when an instance is too large for the exact oracles."""


def as_rational(value: int | str | Fraction) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Floats are refused: they would silently import binary rounding error.
    """
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(value)


def canonical_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``edges`` is sorted, each pair stored with ``u < v``; ``adjacency[v]``
    lists the neighbours of ``v`` in increasing order.
    """

    n: int
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(u, v) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def incident(self, v: int) -> list[Edge]:
        return [canonical_edge(v, u) for u in self.adjacency[v]]


def validate_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a :class:`Graph` from a vertex count and an edge list.

    Raises:
        GraphError: on a loop, a duplicate (unordered) edge, or a vertex id
            outside ``0..n-1``.
    """
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    seen: set[Edge] = set()
    for raw in edges:
        u, v = int(raw[0]), int(raw[1])
        if u == v:
            raise GraphError(f"loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"vertex id out of range in edge ({u}, {v}) for n={n}")
        e = canonical_edge(u, v)
        if e in seen:
            raise GraphError(f"duplicate edge {e}")
        seen.add(e)
    ordered = tuple(sorted(seen))
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in ordered:
        adj[u].append(v)
        adj[v].append(u)
    return Graph(n, ordered, tuple(tuple(sorted(a)) for a in adj))


@dataclass(frozen=True)
class Matching:
    """A set of pairwise vertex-disjoint edges."""

    edges: frozenset[Edge] = frozenset()

    def __post_init__(self) -> None:
        used: set[int] = set()
        for u, v in self.edges:
            if u in used or v in used:
                raise GraphError(f"edges of a matching share a vertex at {(u, v)}")
            used.add(u)
            used.add(v)

    @classmethod
    def of(cls, edges: Iterable[Sequence[int]]) -> Matching:
        return cls(frozenset(canonical_edge(int(e[0]), int(e[1])) for e in edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.edges))

    def __contains__(self, e: object) -> bool:
        return e in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


@dataclass(frozen=True)
class WeightedInstance:
    """A graph with a rational weight ``>= 1`` on every edge, and a budget ``0 < epsilon < 1``."""

    graph: Graph
    weights: Mapping[Edge, Fraction]
    epsilon: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        if set(self.weights) != set(self.graph.edges):
            raise GraphError("weights must be given for exactly the edges of the graph")
        for e, w in self.weights.items():
            if not isinstance(w, Fraction):
                raise GraphError(f"weight of {e} is not a Fraction: {w!r}")
            if w < 1:
                raise GraphError(f"weight below 1 on edge {e}: {w}")
        if not (0 < self.epsilon < 1):
            raise GraphError(f"epsilon must lie strictly between 0 and 1, got {self.epsilon}")

    def weight(self, e: Edge) -> Fraction:
        return self.weights[e]

    def distinct_weights(self) -> list[Fraction]:
        return sorted(set(self.weights.values()))

    def max_weight(self) -> Fraction:
        return max(self.weights.values(), default=Fraction(1))

    def with_weights(self, weights: Mapping[Edge, Fraction]) -> WeightedInstance:
        return WeightedInstance(self.graph, dict(weights), self.epsilon)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedInstance):
            return NotImplemented
        return (
            self.graph == other.graph
            and dict(self.weights) == dict(other.weights)
            and self.epsilon == other.epsilon
        )

    def __hash__(self) -> int:
        return hash((self.graph, tuple(sorted(self.weights.items())), self.epsilon))


def make_instance(
    n: int,
    weighted_edges: Iterable[tuple[int, int, int | str | Fraction]],
    epsilon: int | str | Fraction = Fraction(1, 2),
) -> WeightedInstance:
    """Convenience constructor from ``(u, v, weight)`` triples."""
    triples = [(int(u), int(v), as_rational(w)) for u, v, w in weighted_edges]
    g = validate_graph(n, [(u, v) for u, v, _ in triples])
    weights = {canonical_edge(u, v): w for u, v, w in triples}
    return WeightedInstance(g, weights, as_rational(epsilon))


@dataclass(frozen=True)
class OracleResult:
    matching: Matching
    value: Fraction


def is_matching(g: Graph, m: Iterable[Sequence[int]]) -> bool:
    """True iff no two edges of ``m`` share a vertex.

    Raises:
        GraphError: if some edge of ``m`` is not an edge of ``g``.
    """
    used: set[int] = set()
    ok = True
    for raw in m:
        u, v = int(raw[0]), int(raw[1])
        if not g.has_edge(u, v):
            raise GraphError(f"edge ({u}, {v}) is not in the graph")
        if u in used or v in used:
            ok = False
        used.add(u)
        used.add(v)
    return ok


def matching_weight(inst: WeightedInstance, m: Matching | Iterable[Edge]) -> Fraction:
    edges = m.edges if isinstance(m, Matching) else [canonical_edge(*e) for e in m]
    if not is_matching(inst.graph, edges):
        raise GraphError("not a matching")
    return sum((inst.weights[e] for e in edges), Fraction(0))


def _check_scale(g: Graph) -> None:
    if g.n > MAX_ORACLE_VERTICES and g.m > MAX_ORACLE_EDGES:
        raise OracleScaleError(
            f"exact oracle limited to n <= {MAX_ORACLE_VERTICES} or m <= {MAX_ORACLE_EDGES}"
            f" (got n={g.n}, m={g.m})"
        )


def _exact_max(g: Graph, weight: Mapping[Edge, Fraction]) -> OracleResult:
    # Memoised branching on the lowest free vertex that still has a free
    # neighbour: it is either left unmatched or matched to one of them.
    # Vertices are identified by bit position, so a state is one int.
    adj_mask = [0] * g.n
    for u, v in g.edges:
        adj_mask[u] |= 1 << v
        adj_mask[v] |= 1 << u
    active = 0
    for v in range(g.n):
        if adj_mask[v]:
            active |= 1 << v
    full = (1 << g.n) - 1
    memo: dict[int, Fraction] = {}

    def best(used: int) -> Fraction:
        # best weight achievable on the vertices not in ``used``
        free = active & ~used
        while free:
            low = free & -free
            u = low.bit_length() - 1
            if adj_mask[u] & ~used:
                break
            free ^= low
        else:
            return Fraction(0)
        key = used | (full & ((1 << u) - 1))
        hit = memo.get(key)
        if hit is not None:
            return hit
        top = best(key | (1 << u))
        nbrs = adj_mask[u] & ~key
        while nbrs:
            bit = nbrs & -nbrs
            v = bit.bit_length() - 1
            cand = weight[(u, v)] + best(key | (1 << u) | bit)
            if cand > top:
                top = cand
            nbrs ^= bit
        memo[key] = top
        return top

    opt = best(0)
    # Reconstruct the lexicographically smallest sorted edge list of value
    # ``opt``: visit vertices in increasing order; at each free vertex the
    # empty continuation beats any edge, matching to a smaller partner
    # beats a larger one, and any edge beats skipping the vertex.
    chosen: list[Edge] = []
    used = 0
    needed = opt
    for u in range(g.n):
        if needed == 0:
            break
        if used >> u & 1:
            continue
        prefix = full & ((1 << (u + 1)) - 1)
        picked = False
        for v in g.adjacency[u]:
            if v < u or used >> v & 1:
                continue
            w = weight[(u, v)]
            if w + best(used | prefix | (1 << v)) == needed:
                chosen.append((u, v))
                used |= (1 << u) | (1 << v)
                needed -= w
                picked = True
                break
        if not picked:
            used |= 1 << u
    assert needed == 0
    return OracleResult(Matching(frozenset(chosen)), opt)


def nu_exact(g: Graph) -> OracleResult:
    """Maximum-cardinality matching; ties broken by the lexicographically
    smallest sorted edge list. ``value`` is the cardinality as a Fraction."""
    _check_scale(g)
    return _exact_max(g, {e: Fraction(1) for e in g.edges})


def opt_exact(inst: WeightedInstance) -> OracleResult:
    """Maximum-weight matching of ``inst`` with the same tie-break as :func:`nu_exact`."""
    _check_scale(inst.graph)
    return _exact_max(inst.graph, inst.weights)
