"""Core types and arithmetic for scheduling jobs with ramping speeds.

A job released at time r with speed slope m executes at speed m*(t - r)
at time t >= r, so the work it absorbs over an interval is a quadratic
expression and completion times come from quadratic solves.  Feasibility
questions built on these quantities can hinge on comparing sums of
square roots, which no fixed floating-point format can decide in
general.  Every comparison that matters therefore goes through a
PrecisionContext, which carries a working precision and returns an
honest Indeterminate verdict when two values agree to within tolerance
without being exactly equal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath.ctx_mp import MPContext


class SchedulingError(Exception):
    """Base class for domain errors raised by this package."""


class UnsupportedInstanceError(SchedulingError):
    """Instance shape outside what the requested algorithm handles."""


class NeverCompletesError(SchedulingError):
    """The job's speed is zero forever, so positive work never finishes."""


class InfeasibleIntervalError(SchedulingError):
    """An interval too short to hold the requested amount of work."""


class Verdict(enum.Enum):
    """Outcome of a tolerance-aware comparison."""

    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INDETERMINATE = "indeterminate"


class PrecisionContext:
    """Working precision plus comparison tolerances.

    bits <= 53 uses plain Python floats (fast path); anything above
    gets a private mpmath context so two PrecisionContexts never
    interfere with each other or with mpmath's global state.

    rel_tol defaults to 2**-(bits - 16): sixteen bits of headroom
    below the format, so honest roundoff lands in Indeterminate
    instead of flipping a verdict.
    """

    __slots__ = ("bits", "rel_tol", "abs_tol", "decimal_digits", "_mp", "_sqrt")

    def __init__(self, bits: int = 128, rel_tol=None, abs_tol=None):
        bits = int(bits)
        if bits < 24:
            raise ValueError("precision below 24 bits leaves no room for tolerances")
        self.bits = bits
        if bits <= 53:
            self._mp = None
            self._sqrt = math.sqrt
        else:
            mp = MPContext()
            mp.prec = bits
            self._mp = mp
            self._sqrt = mp.sqrt
        if rel_tol is None:
            self.rel_tol = self.real(2) ** -(bits - 16)
        else:
            self.rel_tol = self.real(rel_tol)
        self.abs_tol = self.rel_tol if abs_tol is None else self.real(abs_tol)
        # Digits needed for a faithful decimal round trip at this precision.
        self.decimal_digits = math.ceil(bits * math.log10(2)) + 2

    def __repr__(self):
        return f"PrecisionContext(bits={self.bits})"

    def __eq__(self, other):
        return (
            isinstance(other, PrecisionContext)
            and self.bits == other.bits
            and self.rel_tol == other.rel_tol
            and self.abs_tol == other.abs_tol
        )

    def __hash__(self):
        return hash((self.bits, float(self.rel_tol), float(self.abs_tol)))

    def real(self, x):
        """Convert x (int, float, str, Fraction, mpf) to this context's scalar type."""
        if isinstance(x, Fraction):
            return self.real(x.numerator) / self.real(x.denominator)
        if self._mp is None:
            return float(x)
        return self._mp.mpf(x)

    def sqrt(self, x):
        if x < 0:
            raise ValueError(f"sqrt of negative value {x}")
        return self._sqrt(x)

    def compare(self, a, b) -> Verdict:
        """Compare a and b at this precision.

        EQUAL means the difference is exactly zero as represented;
        INDETERMINATE means it is nonzero but within tolerance, i.e.
        this precision cannot tell the values apart reliably.
        """
        d = a - b
        if d == 0:
            return Verdict.EQUAL
        tol = self.abs_tol
        scale = max(abs(a), abs(b))
        rel = self.rel_tol * scale
        if rel > tol:
            tol = rel
        if -tol <= d <= tol:
            return Verdict.INDETERMINATE
        return Verdict.LESS if d < 0 else Verdict.GREATER

    def close(self, a, b) -> bool:
        """True when a and b are equal or within tolerance."""
        return self.compare(a, b) in (Verdict.EQUAL, Verdict.INDETERMINATE)

    def format(self, x) -> str:
        """Decimal string that parses back to exactly x at this precision."""
        if self._mp is None:
            return repr(float(x))
        return self._mp.nstr(self._mp.mpf(x), self.decimal_digits, strip_zeros=True)

    def parse(self, s: str):
        v = self.real(s)
        if not self.isfinite(v):
            raise ValueError(f"non-finite numeric literal {s!r}")
        return v

    def isfinite(self, x) -> bool:
        if self._mp is None:
            return math.isfinite(x)
        return self._mp.isfinite(x)


DOUBLE = PrecisionContext(bits=53)


@dataclass(frozen=True)
class SpeedFunction:
    """Execution speed base + slope*(t - origin) for t >= origin."""

    base: object
    slope: object
    origin: object

    def __post_init__(self):
        if self.base < 0 or self.slope < 0:
            raise ValueError("speed coefficients must be nonnegative")


@dataclass(frozen=True)
class Job:
    """One preemptible job: a work amount due inside [release, due]."""

    id: int
    release: object
    due: object
    work: object
    speed: SpeedFunction

    def __post_init__(self):
        if not self.release < self.due:
            raise ValueError(f"job {self.id}: release must precede due date")
        if self.work < 0:
            raise ValueError(f"job {self.id}: negative work")
        if self.speed.origin != self.release:
            raise ValueError(f"job {self.id}: speed origin must equal release")
        if self.speed.base == 0 and self.speed.slope == 0 and self.work != 0:
            raise ValueError(f"job {self.id}: zero speed with positive work")

    @property
    def length(self):
        return self.due - self.release

    @property
    def is_lazy(self) -> bool:
        """Pure ramp: speed zero at release, growing linearly."""
        return self.speed.base == 0 and self.speed.slope > 0


def lazy_job(id: int, release, due, work, slope=1) -> Job:
    return Job(id, release, due, work, SpeedFunction(0, slope, release))


def nonlazy_job(id: int, release, due, work, base=1) -> Job:
    return Job(id, release, due, work, SpeedFunction(base, 0, release))


@dataclass(frozen=True)
class Instance:
    """A set of jobs, kept sorted by (release, id)."""

    jobs: tuple
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        jobs = tuple(sorted(self.jobs, key=lambda j: (j.release, j.id)))
        object.__setattr__(self, "jobs", jobs)
        ids = [j.id for j in jobs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate job ids")

    def job(self, job_id: int) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)

    @property
    def horizon(self):
        """(earliest release, latest due date)."""
        return (
            min(j.release for j in self.jobs),
            max(j.due for j in self.jobs),
        )


FORWARD = "forward"
BACKWARD = "backward-constructed"


@dataclass(frozen=True)
class Segment:
    """Uninterrupted run of one job over [start, end]."""

    job: int
    start: object
    end: object
    work_done: object

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("empty or reversed segment")

    @property
    def length(self):
        return self.end - self.start


@dataclass(frozen=True)
class Schedule:
    """Non-overlapping segments, sorted by start time."""

    segments: tuple
    direction: str = FORWARD

    def __post_init__(self):
        if self.direction not in (FORWARD, BACKWARD):
            raise ValueError(f"unknown schedule direction {self.direction!r}")
        segs = tuple(sorted(self.segments, key=lambda s: (s.start, s.job)))
        object.__setattr__(self, "segments", segs)

    def job_segments(self, job_id: int):
        return tuple(s for s in self.segments if s.job == job_id)


def speed_at(job: Job, t):
    """Instantaneous speed of job at time t (t >= release)."""
    if t < job.release:
        raise ValueError(f"job {job.id} queried before its release")
    sp = job.speed
    return sp.base + sp.slope * (t - sp.origin)


def work_in(job: Job, a, b):
    """Work executed if job runs continuously over [a, b].

    Integral of the speed function; for a pure ramp this is the
    trapezoid slope*((b-r)^2 - (a-r)^2)/2.  Requires release <= a <= b.
    """
    if b < a:
        raise ValueError("reversed interval")
    if a < job.release:
        raise ValueError(f"job {job.id}: interval starts before release")
    sp = job.speed
    u = a - sp.origin
    v = b - sp.origin
    return sp.base * (b - a) + sp.slope * (v * v - u * u) / 2


def completion_from(job: Job, start, remaining, ctx: PrecisionContext):
    """Earliest time the job finishes `remaining` work running from `start`.

    Solves work_in(job, start, t) = remaining for t, using the root
    form that avoids cancellation for small remainders.
    """
    if start < job.release:
        raise ValueError(f"job {job.id}: start before release")
    if remaining < 0:
        raise ValueError("negative remaining work")
    if remaining == 0:
        return start
    sp = job.speed
    if sp.slope == 0:
        if sp.base == 0:
            raise NeverCompletesError(f"job {job.id} has zero speed forever")
        return start + remaining / sp.base
    u0 = start - sp.origin
    # Work from the origin to the unknown finish time.
    c = remaining + sp.base * u0 + sp.slope * u0 * u0 / 2
    disc = sp.base * sp.base + 2 * sp.slope * c
    u = 2 * c / (sp.base + ctx.sqrt(disc))
    return sp.origin + u


def rightmost_running_time(length, work, ctx: PrecisionContext):
    """Time needed to finish `work` when run flush against the deadline.

    For a unit-slope lazy job with window length `length`, running only
    during the last t time units yields (length^2 - (length-t)^2)/2
    work; this inverts that.  Uses 2w/(l + sqrt(l^2 - 2w)) to stay
    accurate when work is much smaller than the window capacity.
    """
    if work < 0:
        raise ValueError("negative work")
    if work == 0:
        return work
    disc = length * length - 2 * work
    if disc < 0:
        raise InfeasibleIntervalError(
            f"interval of length {length} holds at most {length * length / 2} work"
        )
    return 2 * work / (length + ctx.sqrt(disc))


def normalize_slopes(instance: Instance) -> Instance:
    """Rescale every lazy job to unit slope, dividing its work by the slope.

    Execution-time geometry is invariant under this: a slope-m job
    doing w work in any window behaves exactly like a slope-1 job
    doing w/m work there.  Zero-work jobs pass through unchanged.
    """
    out = []
    for j in instance.jobs:
        if j.work == 0:
            out.append(j)
            continue
        if not j.is_lazy:
            raise UnsupportedInstanceError(
                f"job {j.id} is not a pure ramp; cannot normalize"
            )
        m = j.speed.slope
        if m == 1:
            out.append(j)
        else:
            out.append(lazy_job(j.id, j.release, j.due, j.work / m, slope=1))
    return Instance(tuple(out), name=instance.name, provenance=instance.provenance)


def stretch(job: Job, completion):
    """Interval stretch (completion - release)/(due - release)."""
    if completion < job.release:
        raise ValueError("completion before release")
    return (completion - job.release) / (job.due - job.release)
