"""The effective guarantee of a finished run, read off its trace."""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .records import FORCE_MERGE, GEOMETRIC_ROUND, MERGE_SMALLEST, RAISE_SMALLEST, ReductionTrace

_CHARGED = (RAISE_SMALLEST, MERGE_SMALLEST, FORCE_MERGE)


def total_relative_raise(trace: ReductionTrace) -> Fraction:
    """Sum of ``rho`` over raise and merge records (folded records count once)."""
    return sum((r.rho for r in trace.records if r.kind in _CHARGED), Fraction(0))


def rounding_product(trace: ReductionTrace) -> Fraction:
    prod = Fraction(1)
    for r in trace.records:
        if r.kind == GEOMETRIC_ROUND:
            prod *= r.base_or_factor
    return prod


def compute_effective_epsilon(trace: ReductionTrace, oracle_eps: Fraction) -> Fraction:
    """``1 - (1 - oracle_eps - sum(rho)) / prod(rounding bases)``.

    A raise of ``rho`` (relative to the smallest class) costs at most
    ``rho * OPT`` of matching weight; a rounding with base ``b`` costs a
    factor ``1/b``. The result may be ``>= 1``, in which case the bound is
    vacuous but still true.
    """
    slack = 1 - Fraction(oracle_eps) - total_relative_raise(trace)
    return 1 - slack / rounding_product(trace)


def observation4_margin(x, dps: int = 50) -> mpmath.mpf:
    """``x / ln(1/(1 - x))``; at most 1 on ``(0, 1)`` since ``ln(1/(1-x)) >= x``."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)
        if not (0 < x < 1):
            raise ValueError(f"margin is defined on (0, 1), got {x}")
        return x / mpmath.log(1 / (1 - x))
