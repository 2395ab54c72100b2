"""Ladder, transform-record and trace types shared by the reduction engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import gmpy2

from ..graph import Edge

GEOMETRIC_ROUND = "geometric-round"
RAISE_SMALLEST = "raise-smallest"
MERGE_SMALLEST = "merge-smallest"
FORCE_MERGE = "force-merge"

KINDS = (GEOMETRIC_ROUND, RAISE_SMALLEST, MERGE_SMALLEST, FORCE_MERGE)


@dataclass(frozen=True)
class WeightLadder:
    """Geometric weight scale ``base**0 .. base**max_exp``.

    ``class_of`` maps each edge to the exponent of its rounded weight.
    With ``all_present`` every exponent counts as an occupied class even if
    no edge sits there, so the class count is ``max_exp + 1``.
    """

    base: Fraction
    max_exp: int
    class_of: Mapping[Edge, int] = field(default_factory=dict)
    all_present: bool = False

    def value(self, j: int) -> Fraction:
        return self.base**j

    def exponents(self) -> list[int]:
        if self.all_present:
            return list(range(self.max_exp + 1))
        return sorted(set(self.class_of.values()))

    @property
    def class_count(self) -> int:
        return len(self.exponents())


@dataclass(frozen=True)
class TransformRecord:
    """One step of a reduction.

    ``rho`` is the relative raise of the smallest class (``z / w_1``); it is
    zero for rounding steps, whose cost is carried by ``base_or_factor``.

    A record with ``repeat > 1`` stands for that many consecutive raises at
    a fixed class count. Its ``rho`` is the sum of the individual raises and
    ``base_or_factor`` is the factor of the first one. Records marked
    ``exact=False`` hold rigorous bounds instead of exact values: ``rho``
    and the epsilon fields are rounded up to a dyadic grid. Upward rounding
    of ``rho`` only ever weakens the certificate, never invalidates it.
    """

    kind: str
    base_or_factor: Fraction
    rho: Fraction
    epsilon_before: Fraction
    epsilon_after: Fraction
    class_count_before: int
    class_count_after: int
    repeat: int = 1
    exact: bool = True

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.repeat < 1:
            raise ValueError("repeat must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "base_or_factor": _q(self.base_or_factor),
            "rho": _q(self.rho),
            "epsilon_before": _q(self.epsilon_before),
            "epsilon_after": _q(self.epsilon_after),
            "class_count_before": self.class_count_before,
            "class_count_after": self.class_count_after,
            "repeat": self.repeat,
            "exact": self.exact,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> TransformRecord:
        return cls(
            kind=d["kind"],
            base_or_factor=parse_rational(d["base_or_factor"]),
            rho=parse_rational(d["rho"]),
            epsilon_before=parse_rational(d["epsilon_before"]),
            epsilon_after=parse_rational(d["epsilon_after"]),
            class_count_before=int(d["class_count_before"]),
            class_count_after=int(d["class_count_after"]),
            repeat=int(d.get("repeat", 1)),
            exact=bool(d.get("exact", True)),
        )


@dataclass(frozen=True)
class ReductionTrace:
    """Ordered transforms of a run plus the budget handed to the cardinality oracle.

    ``loop_epsilon`` and ``loop_classes`` are the budget and class count on
    entry to the raise/merge loop (``None`` when the run never reaches it).
    """

    records: tuple[TransformRecord, ...]
    epsilon_unweighted_raw: Fraction
    epsilon_unweighted_snapped: Fraction
    force_merge_count: int
    loop_epsilon: Fraction | None = None
    loop_classes: int | None = None

    @property
    def snap_exponent(self) -> int:
        return self.epsilon_unweighted_snapped.denominator.bit_length() - 1

    @property
    def exact(self) -> bool:
        return all(r.exact for r in self.records)

    def steps(self) -> int:
        return sum(r.repeat for r in self.records)

    def count(self, kind: str) -> int:
        return sum(r.repeat for r in self.records if r.kind == kind)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "epsilon_unweighted_raw": _q(self.epsilon_unweighted_raw),
            "epsilon_unweighted_snapped": _q(self.epsilon_unweighted_snapped),
            "force_merge_count": self.force_merge_count,
            "loop_epsilon": None if self.loop_epsilon is None else _q(self.loop_epsilon),
            "loop_classes": self.loop_classes,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> ReductionTrace:
        loop_eps = d.get("loop_epsilon")
        return cls(
            records=tuple(TransformRecord.from_dict(r) for r in d["records"]),
            epsilon_unweighted_raw=parse_rational(d["epsilon_unweighted_raw"]),
            epsilon_unweighted_snapped=parse_rational(d["epsilon_unweighted_snapped"]),
            force_merge_count=int(d["force_merge_count"]),
            loop_epsilon=None if loop_eps is None else parse_rational(loop_eps),
            loop_classes=d.get("loop_classes"),
        )


def format_rational(x: Fraction) -> str:
    """Exact ``p/q`` text, without the interpreter's digit limit for huge ints."""
    return f"{gmpy2.mpz(x.numerator).digits(10)}/{gmpy2.mpz(x.denominator).digits(10)}"


def parse_rational(text: str | int) -> Fraction:
    """Inverse of :func:`format_rational`; also accepts plain integers ``p``."""
    if isinstance(text, int):
        return Fraction(text)
    p, _, q = str(text).strip().partition("/")
    return Fraction(int(gmpy2.mpz(p)), int(gmpy2.mpz(q)) if q else 1)


_q = format_rational
