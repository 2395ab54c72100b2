"""Instance files, generators, the end-to-end pipeline and batch sweeps.

Instance format (``#`` starts a comment)::

    n m
    u v p q      # m lines: edge (u, v) with weight p/q

Numbers in reports are exact ``p/q`` strings; sweeps add decimal columns
for convenience.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import mpmath

from .congest import DEFAULT_POLY_BOUND_EXP
from .graph import (
    GraphError,
    Matching,
    WeightedInstance,
    is_matching,
    matching_weight,
    opt_exact,
    validate_graph,
)
from .protocol import ProtocolReport, UnweightedOracle, reduction_network, run_distributed_reduction
from .reduction import (
    ReductionTrace,
    algorithm2_main,
    compute_effective_epsilon,
    reference_roundings,
)
from .reduction.records import format_rational, parse_rational


class InstanceFormatError(ValueError):
    """Malformed instance text."""


_q = format_rational


def decimal(x: Fraction, digits: int = 12) -> str:
    """Decimal rendering that survives magnitudes far outside float range."""
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(mpmath.mpf(x.numerator) / x.denominator, digits)


def poly_bound(n: int, exp: int = DEFAULT_POLY_BOUND_EXP) -> int:
    return max(n, 2) ** exp


def parse_instance(
    text: str,
    epsilon: Fraction = Fraction(1, 2),
    poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP,
) -> WeightedInstance:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines:
        raise InstanceFormatError("empty instance")
    lineno, head = lines[0]
    if len(head) != 2:
        raise InstanceFormatError(f"line {lineno}: expected 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise InstanceFormatError(f"line {lineno}: 'n m' must be integers") from None
    if n < 0 or m < 0:
        raise InstanceFormatError(f"line {lineno}: negative count")
    body = lines[1:]
    if len(body) != m:
        raise InstanceFormatError(f"header declares {m} edges, found {len(body)}")
    bound = poly_bound(n, poly_bound_exp)
    edges = []
    weights = {}
    for lineno, fields in body:
        if len(fields) != 4:
            raise InstanceFormatError(f"line {lineno}: expected 'u v p q'")
        try:
            u, v, p, q = (int(f) for f in fields)
        except ValueError:
            raise InstanceFormatError(f"line {lineno}: fields must be integers") from None
        if q < 1 or p < 0:
            raise InstanceFormatError(f"line {lineno}: need p >= 0 and q >= 1")
        if p > bound or q > bound:
            raise InstanceFormatError(f"line {lineno}: p or q exceeds n**{poly_bound_exp} = {bound}")
        w = Fraction(p, q)
        if w < 1:
            raise InstanceFormatError(f"line {lineno}: weight below 1 ({w})")
        edges.append((u, v))
        weights[(min(u, v), max(u, v))] = w
    try:
        g = validate_graph(n, edges)
    except GraphError as exc:
        raise InstanceFormatError(str(exc)) from None
    return WeightedInstance(g, weights, Fraction(epsilon))


def write_instance(inst: WeightedInstance) -> str:
    out = [f"{inst.graph.n} {inst.graph.m}"]
    for u, v in inst.graph.edges:
        w = inst.weights[(u, v)]
        out.append(f"{u} {v} {w.numerator} {w.denominator}")
    return "\n".join(out) + "\n"


def generate_instance(
    n: int,
    m: int,
    weight_max: Fraction | int,
    seed: int,
    poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP,
    epsilon: Fraction = Fraction(1, 2),
) -> WeightedInstance:
    """Uniform random simple graph with ``m`` edges and rational weights.

    Each weight is ``p/q`` with ``q`` uniform in ``1..n`` and ``p`` uniform
    among the values keeping ``1 <= p/q <= weight_max`` and ``p <= n**E``,
    so every generated instance parses back.
    """
    pairs = list(itertools.combinations(range(n), 2))
    if not (0 <= m <= len(pairs)):
        raise ValueError(f"cannot place {m} edges on {n} vertices")
    weight_max = Fraction(weight_max)
    if weight_max < 1:
        raise ValueError("weight_max must be at least 1")
    rng = random.Random(seed)
    edges = sorted(rng.sample(pairs, m))
    bound = poly_bound(n, poly_bound_exp)
    weights = {}
    for e in edges:
        q = rng.randint(1, max(n, 1))
        hi = min(bound, math.floor(weight_max * q))
        weights[e] = Fraction(rng.randint(q, hi), q)
    return WeightedInstance(validate_graph(n, edges), weights, Fraction(epsilon))


@dataclass(frozen=True)
class RunReport:
    n: int
    m: int
    W: Fraction
    mode: str
    oracle: str
    oracle_eps: Fraction
    matching: Matching
    value: Fraction
    opt: Fraction | None
    epsilon: Fraction
    epsilon_eff: Fraction
    trace: ReductionTrace
    protocol: ProtocolReport | None = None
    matching_valid: bool = True
    label: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def measured_ratio(self) -> Fraction | None:
        if self.opt is None:
            return None
        return Fraction(1) if self.opt == 0 else self.value / self.opt

    @property
    def certificate_pass(self) -> bool | None:
        if self.opt is None:
            return None
        return self.value >= (1 - self.epsilon_eff) * self.opt

    @property
    def meets_one_minus_epsilon(self) -> bool | None:
        if self.opt is None:
            return None
        return self.value >= (1 - self.epsilon) * self.opt

    @property
    def passed(self) -> bool:
        return self.matching_valid and self.certificate_pass is not False

    def to_dict(self, include_trace: bool = True) -> dict:
        ratio = self.measured_ratio
        d: dict[str, Any] = {
            "label": self.label,
            "n": self.n,
            "m": self.m,
            "W": _q(self.W),
            "mode": self.mode,
            "oracle": self.oracle,
            "oracle_eps": _q(self.oracle_eps),
            "matching": [list(e) for e in self.matching.sorted_edges()],
            "value": _q(self.value),
            "opt": None if self.opt is None else _q(self.opt),
            "measured_ratio": None if ratio is None else _q(ratio),
            "epsilon": _q(self.epsilon),
            "epsilon_eff": _q(self.epsilon_eff),
            "epsilon_eff_decimal": decimal(self.epsilon_eff),
            "epsilon_unweighted": _q(self.trace.epsilon_unweighted_raw),
            "epsilon_unweighted_snapped": _q(self.trace.epsilon_unweighted_snapped),
            "force_merge_count": self.trace.force_merge_count,
            "t_prime": self.trace.loop_classes,
            "matching_valid": self.matching_valid,
            "certificate_pass": self.certificate_pass,
            "meets_1_minus_epsilon": self.meets_one_minus_epsilon,
        }
        if self.protocol is not None:
            p = self.protocol
            d["protocol"] = {
                "rounds_used": p.rounds_used,
                "communication_rounds": p.communication_rounds,
                "max_message_bits": p.max_message_bits,
                "capacity": p.capacity,
                "agreement": p.agreement,
                "messages_per_round": [r.messages_sent for r in p.round_reports],
            }
        if include_trace:
            d["trace"] = self.trace.to_dict()
        return d


def _oracle(oracle: str | UnweightedOracle, seed: int | None = None) -> UnweightedOracle:
    return oracle if isinstance(oracle, UnweightedOracle) else UnweightedOracle.named(oracle, seed)


def run_pipeline(
    inst: WeightedInstance,
    eps: Fraction | None = None,
    oracle: str | UnweightedOracle = "exact",
    mode: str = "seq",
    raise_cap: int | None = None,
    verify: bool = True,
    label: str = "",
) -> RunReport:
    """Run the reduction end to end and score it against the exact optimum.

    ``mode`` is ``seq`` (sequential engine) or ``dist`` (simulated protocol,
    then the oracle on the original graph). In ``dist`` mode the certificate
    uses the sequential trace, which the protocol audit has matched.
    """
    eps = Fraction(inst.epsilon if eps is None else eps)
    orc = _oracle(oracle)
    protocol = None
    if mode == "seq":
        matching, trace = algorithm2_main(inst, eps, orc, raise_cap)
    elif mode == "dist":
        protocol = run_distributed_reduction(reduction_network(inst, eps, raise_cap))
        _, _, trace = reference_roundings(inst, eps, raise_cap)
        matching = orc(inst.graph, protocol.epsilon_snapped)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    valid = is_matching(inst.graph, matching.edges)
    value = matching_weight(inst, matching) if valid else Fraction(0)
    opt = opt_exact(inst).value if verify else None
    return RunReport(
        n=inst.graph.n,
        m=inst.graph.m,
        W=inst.max_weight(),
        mode=mode,
        oracle=orc.short_name,
        oracle_eps=orc.guarantee,
        matching=matching,
        value=value,
        opt=opt,
        epsilon=eps,
        epsilon_eff=compute_effective_epsilon(trace, orc.guarantee),
        trace=trace,
        protocol=protocol,
        matching_valid=valid,
        label=label,
    )


def verify_certificate(report: RunReport) -> bool:
    """Recompute the certificate from the trace alone and check the value against it."""
    if report.opt is None:
        raise ValueError("report has no exact optimum")
    eps_eff = compute_effective_epsilon(report.trace, report.oracle_eps)
    return report.value >= (1 - eps_eff) * report.opt


def verify_report_dict(d: dict, inst: WeightedInstance | None = None) -> bool:
    """Check a serialized report; with ``inst``, value and optimum are recomputed too."""
    trace = ReductionTrace.from_dict(d["trace"])
    value, opt = parse_rational(d["value"]), d["opt"]
    if inst is not None:
        value = matching_weight(inst, Matching.of(d["matching"]))
        opt = opt_exact(inst).value
    if opt is None:
        raise ValueError("report has no exact optimum")
    eps_eff = compute_effective_epsilon(trace, parse_rational(d["oracle_eps"]))
    return value >= (1 - eps_eff) * parse_rational(opt)


SWEEP_COLUMNS = [
    "n",
    "m",
    "epsilon",
    "W",
    "t_prime",
    "rounds",
    "max_message_bits",
    "force_merge_count",
    "epsilon_unweighted",
    "epsilon_eff",
    "measured_ratio",
    "certificate_pass",
    "meets_1_minus_epsilon",
    "seed",
    "weight_max",
    "mode",
    "oracle",
    "W_decimal",
    "epsilon_unweighted_decimal",
    "epsilon_eff_decimal",
    "measured_ratio_decimal",
]


def edges_for(n: int, edge_fraction: Fraction) -> int:
    return int(Fraction(edge_fraction) * (n * (n - 1) // 2))


def sweep_rows(
    ns: Sequence[int],
    epsilons: Sequence[Fraction],
    weight_maxes: Sequence[Fraction | str],
    seeds: Sequence[int],
    *,
    edge_fraction: Fraction = Fraction(1, 2),
    oracle: str = "exact",
    mode: str = "dist",
    raise_cap: int | None = None,
    poly_bound_exp: int = DEFAULT_POLY_BOUND_EXP,
) -> list[dict[str, Any]]:
    """One row per grid point, in grid order (n, epsilon, weight_max, seed).

    A weight_max of the form ``"n^E"`` means ``n**E`` for the row's ``n``.
    """
    rows = []
    for n, eps, wmax, seed in itertools.product(ns, epsilons, weight_maxes, seeds):
        w = resolve_weight_max(wmax, n)
        inst = generate_instance(n, edges_for(n, edge_fraction), w, seed, poly_bound_exp, eps)
        rep = run_pipeline(inst, eps, oracle, mode, raise_cap)
        rows.append(report_row(rep, seed, w))
    return rows


def resolve_weight_max(w: Fraction | int | str, n: int) -> Fraction:
    if isinstance(w, str):
        s = w.strip().replace(" ", "")
        if s.startswith("n^"):
            return Fraction(n ** int(s[2:]))
        return Fraction(s)
    return Fraction(w)


def report_row(rep: RunReport, seed: int | str, wmax: Fraction) -> dict[str, Any]:
    ratio = rep.measured_ratio
    p = rep.protocol
    return {
        "n": rep.n,
        "m": rep.m,
        "epsilon": _q(rep.epsilon),
        "W": _q(rep.W),
        "t_prime": "" if rep.trace.loop_classes is None else rep.trace.loop_classes,
        "rounds": "" if p is None else p.rounds_used,
        "max_message_bits": "" if p is None else p.max_message_bits,
        "force_merge_count": rep.trace.force_merge_count,
        "epsilon_unweighted": _q(rep.trace.epsilon_unweighted_raw),
        "epsilon_eff": _q(rep.epsilon_eff),
        "measured_ratio": "" if ratio is None else _q(ratio),
        "certificate_pass": rep.certificate_pass,
        "meets_1_minus_epsilon": rep.meets_one_minus_epsilon,
        "seed": seed,
        "weight_max": _q(wmax),
        "mode": rep.mode,
        "oracle": rep.oracle,
        "W_decimal": decimal(rep.W),
        "epsilon_unweighted_decimal": decimal(rep.trace.epsilon_unweighted_raw),
        "epsilon_eff_decimal": decimal(rep.epsilon_eff),
        "measured_ratio_decimal": "" if ratio is None else decimal(ratio),
    }


def format_rows(rows: Iterable[dict[str, Any]], fmt: str = "csv") -> str:
    rows = list(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def sweep(
    ns: Sequence[int],
    epsilons: Sequence[Fraction],
    weight_maxes: Sequence[Fraction | str],
    seeds: Sequence[int],
    output: str | None = None,
    fmt: str = "csv",
    **kwargs: Any,
) -> tuple[list[dict[str, Any]], str]:
    """Run a grid and render it; writes to ``output`` when given."""
    rows = sweep_rows(ns, epsilons, weight_maxes, seeds, **kwargs)
    text = format_rows(rows, fmt)
    if output is not None:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return rows, text

