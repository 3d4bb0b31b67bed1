"""Scheduling of jobs whose execution speed ramps up linearly after release."""

from .core import (
    BACKWARD,
    DOUBLE,
    FORWARD,
    InfeasibleIntervalError,
    Instance,
    Job,
    NeverCompletesError,
    PrecisionContext,
    Schedule,
    SchedulingError,
    Segment,
    SpeedFunction,
    UnsupportedInstanceError,
    Verdict,
    completion_from,
    lazy_job,
    nonlazy_job,
    normalize_slopes,
    rightmost_running_time,
    speed_at,
    stretch,
    work_in,
)

__version__ = "0.1.0"

__all__ = [
    "BACKWARD",
    "DOUBLE",
    "FORWARD",
    "InfeasibleIntervalError",
    "Instance",
    "Job",
    "NeverCompletesError",
    "PrecisionContext",
    "Schedule",
    "SchedulingError",
    "Segment",
    "SpeedFunction",
    "UnsupportedInstanceError",
    "Verdict",
    "completion_from",
    "lazy_job",
    "nonlazy_job",
    "normalize_slopes",
    "rightmost_running_time",
    "speed_at",
    "stretch",
    "work_in",
    "__version__",
]
