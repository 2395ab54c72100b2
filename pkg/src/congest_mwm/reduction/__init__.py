"""Sequential reduction engine: transforms, algorithms and the certificate."""

from .algorithms import Oracle, algorithm1_mwm, algorithm2_main, reference_roundings
from .certificate import compute_effective_epsilon, observation4_margin
from .records import (
    FORCE_MERGE,
    GEOMETRIC_ROUND,
    MERGE_SMALLEST,
    RAISE_SMALLEST,
    ReductionTrace,
    TransformRecord,
    WeightLadder,
)
from .rounding import geometric_round_instance, ladder_size_bound, round_weight_to_power
from .schedule import ScheduleResult, default_raise_cap, ladder_schedule
from .transforms import (
    PremiseError,
    epsilon_decay,
    merge_smallest_class,
    raise_smallest_class,
    snap_epsilon,
)

__all__ = [
    "FORCE_MERGE",
    "GEOMETRIC_ROUND",
    "MERGE_SMALLEST",
    "RAISE_SMALLEST",
    "Oracle",
    "PremiseError",
    "ReductionTrace",
    "ScheduleResult",
    "TransformRecord",
    "WeightLadder",
    "algorithm1_mwm",
    "algorithm2_main",
    "compute_effective_epsilon",
    "default_raise_cap",
    "epsilon_decay",
    "geometric_round_instance",
    "ladder_schedule",
    "ladder_size_bound",
    "merge_smallest_class",
    "observation4_margin",
    "raise_smallest_class",
    "reference_roundings",
    "round_weight_to_power",
    "snap_epsilon",
]
