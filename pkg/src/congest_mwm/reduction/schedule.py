"""The raise/merge loop over a full geometric ladder.

Every class is assumed present, so the loop never looks at the graph: its
decisions depend only on the ladder base, the ladder height, the budget on
entry and the raise cap. The sequential engine and every simulated node
both call :func:`ladder_schedule`.

Each class starts with its smallest value exactly one ladder step (a
factor ``base``) below the next class, so only ratios relative to the class
start value matter. Per class, the loop raises the smallest value by
``1 + eps/c`` while the relative gap ``z / w_1`` exceeds ``eps / c`` (``c``
= current class count), then merges it into the next class; every step
decays the budget by ``(c - 1) / c``. After ``raise_cap`` raises in one class
a force-merge closes the remaining gap.

Exact arithmetic is used while the numbers stay small. Long schedules
drive the budget's numerator and denominator to millions of bits, so past
a size threshold the loop switches to rigorous interval arithmetic
(mpmath, 320-bit endpoints): each decision is taken only when the interval
comparison is certain, falling back to an exact replay otherwise, so the
sequence of decisions is identical to the exact one. The budget itself is
kept exactly throughout, as a prefactor times integer powers, and the
final budget is returned as an exact Fraction.

Records produced in interval mode carry upper bounds (``exact=False``).
Consecutive raises in interval mode are folded into one record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import iv as _iv_global

from .records import FORCE_MERGE, MERGE_SMALLEST, RAISE_SMALLEST, TransformRecord

IV = type(_iv_global)()
IV.prec = 320

# Above these sizes (numerator bits plus denominator bits) exact mode stops.
EXACT_EPS_BITS = 1 << 12
EXACT_VALUE_BITS = 1 << 13

# Inexact records are rounded up to multiples of 2**-GRID_BITS.
GRID_BITS = 256


def default_raise_cap(classes: int) -> int:
    return 4 * classes


def _bits(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def _to_iv(x: Fraction):
    return IV.mpf(x.numerator) / IV.mpf(x.denominator)


def _grid_up(x) -> Fraction:
    """Upper end of an interval, rounded up to a multiple of 2**-GRID_BITS.

    Negative upper ends clamp to 0: every quantity rounded here is
    nonnegative.
    """
    sign, man, exp, _ = x._mpi_[1]
    if man == 0:
        if exp != 0:
            raise ArithmeticError("non-finite interval endpoint")
        return Fraction(0)
    if sign:
        return Fraction(0)
    shift = exp + GRID_BITS
    num = man << shift if shift >= 0 else -((-man) >> -shift)
    return Fraction(num, 1 << GRID_BITS)


@lru_cache(maxsize=None)
def _log_ratio(c: int):
    # log((c - 1) / c) as an interval
    return IV.log(IV.mpf(c - 1)) - IV.log(IV.mpf(c))


class _Budget:
    """The loop's epsilon: ``prefactor * prod(j ** exps[j])``, exactly.

    ``log`` tracks its logarithm as an interval; ``exact`` caches the value
    as a Fraction while it is small.
    """

    def __init__(self, eps: Fraction) -> None:
        self.prefactor = eps
        self.exps: dict[int, int] = {}
        self.log = IV.log(_to_iv(eps))
        self.exact: Fraction | None = eps

    def decay(self, c: int, steps: int) -> None:
        if steps == 0:
            return
        if c - 1 > 1:
            self.exps[c - 1] = self.exps.get(c - 1, 0) + steps
        self.exps[c] = self.exps.get(c, 0) - steps
        self.log = self.log + steps * _log_ratio(c)
        if self.exact is not None:
            self.exact = self.exact * Fraction(c - 1, c) ** steps
            if _bits(self.exact) > EXACT_EPS_BITS:
                self.exact = None

    def interval(self):
        if self.exact is not None:
            return _to_iv(self.exact)
        return IV.exp(self.log)

    def value(self) -> Fraction:
        if self.exact is not None:
            return self.exact
        num, den = self.prefactor.numerator, self.prefactor.denominator
        ups = [j**e for j, e in self.exps.items() if e > 0]
        downs = [j ** (-e) for j, e in self.exps.items() if e < 0]
        return Fraction(num * math.prod(ups), den * math.prod(downs))


@dataclass(frozen=True)
class ScheduleResult:
    records: tuple[TransformRecord, ...]
    epsilon_raw: Fraction
    force_merge_count: int
    classes: int
    epsilon_in: Fraction
    base: Fraction
    raise_cap: int


class _ClassRun:
    """State of the loop inside one class (class count ``c``)."""

    def __init__(self, sched: _Schedule, c: int) -> None:
        self.s = sched
        self.c = c
        self.q = Fraction(c - 1, c)
        self.k = 0  # raises done in this class
        self.eps_start = sched.budget  # decayed in bulk when the class ends
        self.eps: Fraction | None = sched.budget.exact
        self.v: Fraction | None = Fraction(1)  # smallest value / class start value
        self.v_iv = None
        self.eps_iv = None
        # exact anchors for replays in interval mode
        self.anchor_k = 0
        self.anchor_v = Fraction(1)
        self.pending = 0  # raises folded into the next inexact record
        self.pending_eps_iv = None

    # -- exact mode --------------------------------------------------------
    def run(self) -> None:
        if self.eps is not None:
            if self._run_exact():
                return
        self._run_interval()

    def _run_exact(self) -> bool:
        s, c = self.s, self.c
        x = s.base
        eps, v = self.eps, self.v
        while True:
            z = x - v
            if z / v <= eps / c:
                self._finish(MERGE_SMALLEST, rho=z / v, factor=x / v, eps=eps)
                return True
            if self.k == s.cap:
                self._finish(FORCE_MERGE, rho=z / v, factor=x / v, eps=eps)
                return True
            step = eps / c
            s.emit(
                TransformRecord(RAISE_SMALLEST, 1 + step, step, eps, eps * self.q, c, c)
            )
            v = v * (1 + step)
            eps = eps * self.q
            self.k += 1
            if _bits(eps) > EXACT_EPS_BITS or _bits(v) > EXACT_VALUE_BITS:
                self.eps, self.v = eps, v
                self.anchor_k, self.anchor_v = self.k, v
                return False

    # -- interval mode -------------------------------------------------------
    def _eps_now_exact(self) -> Fraction:
        return self.eps_start.value() * self.q**self.k

    def _replay_v(self) -> Fraction:
        # exact smallest value after self.k raises, from the last exact anchor
        eps = self.eps_start.value() * self.q**self.anchor_k
        v = self.anchor_v
        for _ in range(self.anchor_k, self.k):
            v = v * (1 + eps / self.c)
            eps = eps * self.q
        return v

    def _run_interval(self) -> None:
        s, c = self.s, self.c
        if self.k == 0:
            self.eps_iv = self.eps_start.interval()
        else:
            self.eps_iv = _to_iv(self.eps)
        self.v_iv = _to_iv(self.v)
        # interval constants, so the loop never converts Python ints
        one, c_iv = IV.mpf(1), IV.mpf(c)
        q_iv = IV.mpf(c - 1) / c_iv
        x_iv = s.base_iv
        while True:
            eps_iv, v_iv = self.eps_iv, self.v_iv
            # merges are impossible for good once v * exp(eps) <= x, since all
            # future raises multiply v by less than exp(eps) in total
            if self.k < s.cap and (v_iv * IV.exp(eps_iv) <= x_iv) is True:
                remaining = s.cap - self.k
                self._fold_raises(remaining, eps_iv, q_iv)
                return self._finish_interval(FORCE_MERGE)
            gap = x_iv / v_iv - one
            thr = eps_iv / c_iv
            decision = gap <= thr
            if decision is None:
                v_exact = self._replay_v()
                eps_exact = self._eps_now_exact()
                decision = (s.base - v_exact) / v_exact <= eps_exact / c
            if decision:
                return self._finish_interval(MERGE_SMALLEST)
            if self.k == s.cap:
                return self._finish_interval(FORCE_MERGE)
            if self.pending == 0:
                self.pending_eps_iv = eps_iv
            self.pending += 1
            self.v_iv = v_iv * (one + thr)
            self.eps_iv = eps_iv * q_iv
            self.k += 1

    def _fold_raises(self, count: int, eps_iv, q_iv) -> None:
        # skip ``count`` certain raises: the value grows by at least the sum
        # of the steps, and the sum telescopes to eps * (1 - q**count)
        if count == 0:
            return
        if self.pending == 0:
            self.pending_eps_iv = eps_iv
        # the steps are a_i = (eps/c) q**i; prod(1 + a_i) >= exp(sum a_i - sum a_i**2 / 2)
        c = self.c
        total = eps_iv * (1 - q_iv**count)
        squares = (eps_iv / c) ** 2 * (1 - q_iv ** (2 * count)) / (1 - q_iv**2)
        # only a lower bound on v is kept from here on
        self.v_iv = (self.v_iv.a * IV.exp((total - squares / 2).a)).a
        self.eps_iv = eps_iv * q_iv**count
        self.pending += count
        self.k += count

    def _flush(self) -> None:
        if self.pending == 0:
            return
        c = self.c
        first = self.pending_eps_iv
        total = first - self.eps_iv
        self.s.emit(
            TransformRecord(
                RAISE_SMALLEST,
                base_or_factor=_grid_up_factor(1 + first / c),
                rho=_grid_up(total),
                epsilon_before=_grid_up(first),
                epsilon_after=_grid_up(self.eps_iv),
                class_count_before=c,
                class_count_after=c,
                repeat=self.pending,
                exact=False,
            )
        )
        self.pending = 0

    def _finish_interval(self, kind: str) -> None:
        self._flush()
        s, c = self.s, self.c
        rho = _grid_up(s.base_iv / self.v_iv - 1)
        if kind == MERGE_SMALLEST:
            # the true gap is at most eps / c here, so either bound is sound
            rho = min(rho, _grid_up(self.eps_iv / c))
        s.emit(
            TransformRecord(
                kind,
                base_or_factor=1 + rho,
                rho=rho,
                epsilon_before=_grid_up(self.eps_iv),
                epsilon_after=_grid_up(self.eps_iv * (c - 1) / c),
                class_count_before=c,
                class_count_after=c - 1,
                exact=False,
            )
        )
        self._close(kind)

    # -- shared ----------------------------------------------------------------
    def _finish(self, kind: str, rho: Fraction, factor: Fraction, eps: Fraction) -> None:
        c = self.c
        self.s.emit(TransformRecord(kind, factor, rho, eps, eps * self.q, c, c - 1))
        self._close(kind)

    def _close(self, kind: str) -> None:
        self.s.budget.decay(self.c, self.k + 1)
        if kind == FORCE_MERGE:
            self.s.force += 1


def _grid_up_factor(x) -> Fraction:
    return 1 + _grid_up(x - 1)


class _Schedule:
    def __init__(self, base: Fraction, top: int, eps: Fraction, cap: int, keep: bool) -> None:
        self.base = base
        self.base_iv = _to_iv(base)
        self.top = top
        self.cap = cap
        self.budget = _Budget(eps)
        self.force = 0
        self.keep = keep
        self.records: list[TransformRecord] = []

    def emit(self, record: TransformRecord) -> None:
        if self.keep:
            self.records.append(record)

    def run(self) -> None:
        for c in range(self.top + 1, 1, -1):
            _ClassRun(self, c).run()


def ladder_schedule(
    base: Fraction,
    top: int,
    eps: Fraction,
    raise_cap: int | None = None,
    keep_records: bool = True,
) -> ScheduleResult:
    """Run the raise/merge loop over classes ``base**0 .. base**top``.

    Returns the records, the exact final budget and the force-merge count.
    """
    if base <= 1:
        raise ValueError(f"ladder base must exceed 1, got {base}")
    if top < 0:
        raise ValueError("ladder height must be nonnegative")
    if not (0 < eps < 1):
        raise ValueError(f"budget must lie in (0, 1), got {eps}")
    classes = top + 1
    cap = default_raise_cap(classes) if raise_cap is None else raise_cap
    if cap < 0:
        raise ValueError("raise cap must be nonnegative")
    return _cached_schedule(base, top, eps, cap, keep_records)


@lru_cache(maxsize=256)
def _cached_schedule(base: Fraction, top: int, eps: Fraction, cap: int, keep: bool) -> ScheduleResult:
    sched = _Schedule(base, top, eps, cap, keep)
    sched.run()
    return ScheduleResult(
        records=tuple(sched.records),
        epsilon_raw=sched.budget.value(),
        force_merge_count=sched.force,
        classes=top + 1,
        epsilon_in=eps,
        base=base,
        raise_cap=cap,
    )
