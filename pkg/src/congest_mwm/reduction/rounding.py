"""Geometric rounding of weights onto powers of a base ``> 1``."""

from __future__ import annotations

import math
from fractions import Fraction

from ..graph import WeightedInstance
from .records import WeightLadder


def _log(x: Fraction) -> float:
    # float log that survives numerators and denominators beyond float range
    return math.log(x.numerator) - math.log(x.denominator)


def _pow_ge(base: Fraction, j: int, w: Fraction) -> bool:
    """Exact test ``base**j >= w`` by cross-multiplication (no gcd work)."""
    return base.numerator**j * w.denominator >= w.numerator * base.denominator**j


def _smallest_exponent(w: Fraction, base: Fraction) -> int:
    # smallest j >= 0 with base**j >= w; a float estimate is corrected exactly
    if w <= 1:
        return 0
    j = max(0, math.ceil(_log(w) / _log(base)))
    while j > 0 and _pow_ge(base, j - 1, w):
        j -= 1
    while not _pow_ge(base, j, w):
        j += 1
    return j


def _check_base(base: Fraction) -> None:
    if base <= 1:
        raise ValueError(f"rounding base must exceed 1, got {base}")


def round_weight_to_power(w: Fraction, base: Fraction) -> tuple[int, Fraction]:
    """Return ``(j, base**j)`` with ``base**(j-1) < w <= base**j``.

    ``j == 0`` exactly when ``w == 1``.
    """
    _check_base(base)
    if w < 1:
        raise ValueError(f"weight must be at least 1, got {w}")
    j = _smallest_exponent(w, base)
    return j, base**j


def ladder_size_bound(W: Fraction, base: Fraction) -> int:
    """Smallest ``t`` with ``base**t >= W``."""
    _check_base(base)
    if W < 1:
        raise ValueError(f"largest weight must be at least 1, got {W}")
    return _smallest_exponent(W, base)


def geometric_round_instance(
    inst: WeightedInstance, base: Fraction, *, all_present: bool = False, max_exp: int | None = None
) -> tuple[WeightedInstance, WeightLadder]:
    """Round every edge weight up to the next power of ``base``.

    ``max_exp`` defaults to the largest exponent in use; pass a larger value
    (with ``all_present``) to size the ladder from a shared bound instead.
    """
    _check_base(base)
    classes = {}
    weights = {}
    for e, w in inst.weights.items():
        j, value = round_weight_to_power(w, base)
        classes[e] = j
        weights[e] = value
    top = max(classes.values(), default=0)
    if max_exp is not None:
        if max_exp < top:
            raise ValueError(f"max_exp {max_exp} below the largest rounded exponent {top}")
        top = max_exp
    return inst.with_weights(weights), WeightLadder(base, top, classes, all_present)
