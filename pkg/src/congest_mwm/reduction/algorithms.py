"""Sequential reference for the reduction: the entry point and its workhorse.

:func:`algorithm2_main` rounds to powers of ``tau = 1/(1 - eps/2)`` and
hands the full ladder to :func:`algorithm1_mwm`. That in turn either merges
the two smallest weight values while their gap is cheap, or re-rounds to
powers of ``x = 1/(1 - eps/t)`` and runs the raise/merge loop of
:mod:`.schedule` until a single weight remains. The cardinality oracle then
runs on the original graph.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from ..graph import Graph, Matching, WeightedInstance
from .records import GEOMETRIC_ROUND, MERGE_SMALLEST, ReductionTrace, TransformRecord
from .rounding import geometric_round_instance, ladder_size_bound
from .schedule import ladder_schedule
from .transforms import epsilon_decay, snap_epsilon

# (graph, snapped epsilon) -> matching
Oracle = Callable[[Graph, Fraction], Matching]


def _check_eps(eps: Fraction) -> Fraction:
    eps = Fraction(eps)
    if not (0 < eps < 1):
        raise ValueError(f"epsilon must lie strictly between 0 and 1, got {eps}")
    return eps


def _call_oracle(oracle: Oracle, g: Graph, eps: Fraction) -> tuple[Matching, Fraction]:
    _, snapped = snap_epsilon(eps)
    return oracle(g, snapped), snapped


def algorithm1_mwm(
    inst: WeightedInstance,
    eps: Fraction,
    oracle: Oracle,
    *,
    values: Sequence[Fraction] | None = None,
    raise_cap: int | None = None,
) -> tuple[Matching, ReductionTrace]:
    """Reduce an instance whose weights take at most ``t`` known values.

    ``values`` lists the known weight values, smallest first (``t`` is its
    length); it defaults to the distinct weights of ``inst``. Values with no
    edge still count as classes.
    """
    matching, trace, _ = _algorithm1(inst, eps, oracle, values, raise_cap)
    return matching, trace


def _algorithm1(
    inst: WeightedInstance,
    eps: Fraction,
    oracle: Oracle,
    values: Sequence[Fraction] | None,
    raise_cap: int | None,
) -> tuple[Matching, ReductionTrace, WeightedInstance | None]:
    # also returns the instance rounded to powers of x (None without that step)
    eps = _check_eps(eps)
    vals = sorted(set(inst.weights.values()) if values is None else set(values))
    if not vals:
        vals = [Fraction(1)]
    missing = set(inst.weights.values()) - set(vals)
    if missing:
        raise ValueError(f"weights {sorted(missing)} are not among the known values")
    records: list[TransformRecord] = []
    weights = dict(inst.weights)

    # cheap gaps: merge the smallest value upward and shrink the class count
    while len(vals) > 1:
        t = len(vals)
        w1, w2 = vals[0], vals[1]
        rho = (w2 - w1) / w1
        if rho > eps / t:
            break
        for e, w in weights.items():
            if w == w1:
                weights[e] = w2
        after = epsilon_decay(eps, t)
        records.append(TransformRecord(MERGE_SMALLEST, w2 / w1, rho, eps, after, t, t - 1))
        eps = after
        vals.pop(0)

    if len(vals) == 1:
        matching, snapped = _call_oracle(oracle, inst.graph, eps)
        return matching, ReductionTrace(tuple(records), eps, snapped, 0), None

    t = len(vals)
    x = 1 / (1 - eps / t)
    eps2 = epsilon_decay(eps, t)
    top = ladder_size_bound(vals[-1], x)
    rounded, _ = geometric_round_instance(
        inst.with_weights(weights), x, all_present=True, max_exp=top
    )
    records.append(TransformRecord(GEOMETRIC_ROUND, x, Fraction(0), eps, eps2, t, top + 1))
    sched = ladder_schedule(x, top, eps2, raise_cap)
    records.extend(sched.records)
    # every class has been merged into the top one
    final = x**top
    assert all(w <= final for w in rounded.weights.values())
    matching, snapped = _call_oracle(oracle, inst.graph, sched.epsilon_raw)
    trace = ReductionTrace(
        tuple(records),
        sched.epsilon_raw,
        snapped,
        sched.force_merge_count,
        loop_epsilon=eps2,
        loop_classes=top + 1,
    )
    return matching, trace, rounded


def algorithm2_main(
    inst: WeightedInstance,
    eps: Fraction | None = None,
    oracle: Oracle | None = None,
    raise_cap: int | None = None,
) -> tuple[Matching, ReductionTrace]:
    """Entry point for arbitrary weights ``>= 1``.

    ``eps`` defaults to the instance budget. The returned trace starts with
    the ``tau`` rounding record followed by the records of
    :func:`algorithm1_mwm`.
    """
    if oracle is None:
        raise ValueError("an unweighted oracle is required")
    matching, trace, _, _ = _algorithm2(inst, eps, oracle, raise_cap)
    return matching, trace


def reference_roundings(
    inst: WeightedInstance, eps: Fraction | None = None, raise_cap: int | None = None
) -> tuple[WeightedInstance, WeightedInstance | None, ReductionTrace]:
    """The ``tau``-rounded and ``x``-rounded instances the entry point builds.

    The oracle is not called. The ``x``-rounded instance is None when every
    weight lands in one ``tau`` class at exponent 0.
    """
    _, trace, tau_inst, x_inst = _algorithm2(inst, eps, lambda g, e: Matching(), raise_cap)
    return tau_inst, x_inst, trace


def _algorithm2(
    inst: WeightedInstance,
    eps: Fraction | None,
    oracle: Oracle,
    raise_cap: int | None,
) -> tuple[Matching, ReductionTrace, WeightedInstance, WeightedInstance | None]:
    eps = _check_eps(inst.epsilon if eps is None else eps)
    eps1 = eps / 2
    tau = 1 / (1 - eps1)
    rounded, ladder = geometric_round_instance(inst, tau)
    r = ladder_size_bound(rounded.max_weight(), tau)
    head = TransformRecord(
        GEOMETRIC_ROUND, tau, Fraction(0), eps, eps1, len(inst.distinct_weights()), r + 1
    )
    ladder_values = [tau**j for j in range(r + 1)]
    matching, tail, x_inst = _algorithm1(rounded, eps1, oracle, ladder_values, raise_cap)
    trace = ReductionTrace(
        (head,) + tail.records,
        tail.epsilon_unweighted_raw,
        tail.epsilon_unweighted_snapped,
        tail.force_merge_count,
        loop_epsilon=tail.loop_epsilon,
        loop_classes=tail.loop_classes,
    )
    return matching, trace, rounded, x_inst
