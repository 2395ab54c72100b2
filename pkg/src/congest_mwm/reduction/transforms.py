"""Single-step transforms on the smallest weight class, and budget bookkeeping."""

from __future__ import annotations

from fractions import Fraction

from ..graph import WeightedInstance
from .records import FORCE_MERGE, MERGE_SMALLEST, RAISE_SMALLEST, TransformRecord, WeightLadder


class PremiseError(ValueError):
    """A transform was requested whose precondition does not hold."""


def epsilon_decay(eps: Fraction, t: int) -> Fraction:
    """``((t - 1) / t) * eps``, the budget left after one step at class count ``t``."""
    if t < 2:
        raise ValueError(f"decay needs at least two classes, got t={t}")
    return eps * Fraction(t - 1, t)


def snap_epsilon(eps: Fraction) -> tuple[int, Fraction]:
    """Unique ``k >= 1`` with ``1/2**k <= eps < 1/2**(k-1)``, and ``1/2**k``."""
    if not (0 < eps < 1):
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    p, q = eps.numerator, eps.denominator
    # 2**(k-1) * p < q <= 2**k * p
    k = max(1, q.bit_length() - p.bit_length())
    while (p << k) < q:
        k += 1
    while k > 1 and (p << (k - 1)) >= q:
        k -= 1
    return k, Fraction(1, 1 << k)


def _two_smallest(inst: WeightedInstance) -> tuple[Fraction, Fraction]:
    values = inst.distinct_weights()
    if len(values) < 2:
        raise PremiseError("transform needs at least two weight classes")
    return values[0], values[1]


def merge_smallest_class(
    inst: WeightedInstance,
    ladder: WeightLadder | None,
    eps: Fraction,
    force: bool = False,
    t: int | None = None,
) -> tuple[WeightedInstance, WeightLadder | None, TransformRecord]:
    """Give every edge of the smallest class the second-smallest weight.

    ``t`` is the class count used in the premise ``z / w_1 <= eps / t`` and
    in the budget decay; it defaults to the number of distinct weights.
    With ``force`` the premise is skipped and the record is a force-merge
    charged at the true relative gap.
    """
    w1, w2 = _two_smallest(inst)
    t = len(inst.distinct_weights()) if t is None else t
    rho = (w2 - w1) / w1
    if not force and rho > eps / t:
        raise PremiseError(f"merge premise violated: gap {rho} exceeds eps/t = {eps / t}")
    moved = [e for e, w in inst.weights.items() if w == w1]
    weights = dict(inst.weights)
    for e in moved:
        weights[e] = w2
    new_ladder = ladder
    if ladder is not None and ladder.class_of:
        target = next(ladder.class_of[e] for e, w in inst.weights.items() if w == w2)
        classes = dict(ladder.class_of)
        for e in moved:
            classes[e] = target
        new_ladder = WeightLadder(ladder.base, ladder.max_exp, classes, ladder.all_present)
    record = TransformRecord(
        kind=FORCE_MERGE if force else MERGE_SMALLEST,
        base_or_factor=w2 / w1,
        rho=rho,
        epsilon_before=eps,
        epsilon_after=epsilon_decay(eps, t),
        class_count_before=t,
        class_count_after=t - 1,
    )
    return inst.with_weights(weights), new_ladder, record


def raise_smallest_class(
    inst: WeightedInstance,
    ladder: WeightLadder | None,
    eps: Fraction,
    t: int,
) -> tuple[WeightedInstance, TransformRecord]:
    """Multiply the smallest weight by exactly ``1 + eps / t``."""
    if eps <= 0 or t < 1:
        raise ValueError("raise needs eps > 0 and t >= 1")
    w1, _ = _two_smallest(inst)
    rho = eps / t
    factor = 1 + rho
    weights = {e: (w * factor if w == w1 else w) for e, w in inst.weights.items()}
    record = TransformRecord(
        kind=RAISE_SMALLEST,
        base_or_factor=factor,
        rho=rho,
        epsilon_before=eps,
        epsilon_after=epsilon_decay(eps, t) if t >= 2 else eps,
        class_count_before=t,
        class_count_after=t,
    )
    return inst.with_weights(weights), record
