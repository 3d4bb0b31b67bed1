"""Offline scheduling: feasibility, validation, and busy-time bounds.

The central routine is a backward sweep from the latest due date that
always runs the available job with the latest release time.  Running
late is maximally cheap in this model (speeds ramp up), so the sweep
packs work as close to the deadlines as priorities allow; it fails to
place some work only when every schedule fails, which makes it both a
busy-time minimizer and a feasibility decider.  That equivalence is
what the verdict logic below relies on.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .core import (
    BACKWARD,
    InfeasibleIntervalError,
    Instance,
    PrecisionContext,
    Schedule,
    Segment,
    UnsupportedInstanceError,
    Verdict,
    work_in,
)


class Feasibility(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of a feasibility check.

    deficits maps job id to work provably left over (infeasible case).
    margin is the smallest gap any decision rested on: time distance
    to a release for exhausted jobs, leftover work for deficient ones.
    Units are therefore mixed; treat it as a diagnostic of how close
    the instance is to the boundary, not as a single metric.
    """

    status: Feasibility
    witness: Schedule | None = None
    deficits: dict = field(default_factory=dict)
    margin: object = None


def _check_sweepable(instance: Instance):
    for j in instance.jobs:
        if j.work == 0:
            continue
        if not j.is_lazy:
            raise UnsupportedInstanceError(
                f"job {j.id} has a nonzero base speed; the backward sweep "
                "covers pure-ramp jobs only"
            )


def lrtb(instance: Instance, ctx: PrecisionContext):
    """Backward sweep prioritizing the latest release time.

    Returns (schedule, verdict).  The schedule holds whatever work
    could be placed, in forward order; the verdict records per-job
    deficits for work that no schedule could place.
    """
    _check_sweepable(instance)
    jobs = [j for j in instance.jobs if j.work > 0]
    rem = {j.id: j.work for j in jobs}
    segments = []
    deficits = {}
    margin = None
    indeterminate = False

    def note_margin(value):
        nonlocal margin
        if margin is None or value < margin:
            margin = value

    if jobs:
        tau = max(j.due for j in jobs)
        while True:
            runnable = [
                j for j in jobs if rem[j.id] > 0 and j.release < tau and j.due >= tau
            ]
            if not runnable:
                pending_dues = [
                    j.due for j in jobs if rem[j.id] > 0 and j.due < tau
                ]
                if not pending_dues:
                    break
                tau = max(pending_dues)
                continue
            top = min(runnable, key=lambda j: (-j.release, j.id))
            r = top.release
            m = top.speed.slope
            # Where the top job's remaining work runs out, sweeping backward.
            disc = (tau - r) * (tau - r) - 2 * rem[top.id] / m
            exhaust = r + ctx.sqrt(disc) if disc > 0 else None
            next_due = None
            for j in jobs:
                if rem[j.id] > 0 and j.due < tau:
                    if next_due is None or j.due > next_due:
                        next_due = j.due
            lo = r if exhaust is None else exhaust
            if next_due is not None and next_due > lo:
                lo = next_due
            if lo < tau:
                segments.append(Segment(top.id, lo, tau, work_in(top, lo, tau)))
            if exhaust is not None and lo == exhaust:
                rem[top.id] = 0
                note_margin(exhaust - r)
            elif next_due is not None and lo == next_due:
                rem[top.id] = rem[top.id] - work_in(top, next_due, tau)
            else:
                # Swept all the way to the release without finishing.
                deficit = rem[top.id] - work_in(top, r, tau)
                rem[top.id] = 0
                cmp = ctx.compare(deficit, 0)
                if cmp is Verdict.GREATER:
                    deficits[top.id] = deficit
                elif cmp is Verdict.INDETERMINATE:
                    indeterminate = True
                note_margin(abs(deficit))
            tau = lo

    schedule = Schedule(tuple(segments), direction=BACKWARD)
    if deficits:
        status = Feasibility.INFEASIBLE
        witness = None
    elif indeterminate:
        status = Feasibility.INDETERMINATE
        witness = None
    else:
        status = Feasibility.FEASIBLE
        witness = schedule
    return schedule, FeasibilityVerdict(status, witness, deficits, margin)


def total_busy_time(schedule: Schedule):
    """Sum of segment lengths (segments never overlap)."""
    total = 0
    for s in schedule.segments:
        total = total + s.length
    return total


@dataclass
class ValidationReport:
    ok: bool
    violations: list
    incomplete: dict

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


def validate_schedule(
    instance: Instance,
    schedule: Schedule,
    ctx: PrecisionContext,
    require_due_dates: bool = False,
) -> ValidationReport:
    """Check a schedule against an instance.

    Violations cover overlap, execution outside a job's window, and
    segment work inconsistent with the speed function.  Jobs whose
    placed work falls short are reported in `incomplete`; that is a
    violation only when due dates are required.
    """
    violations = []
    incomplete = {}
    by_id = {j.id: j for j in instance.jobs}
    prev = None
    placed = {j.id: 0 for j in instance.jobs}
    for seg in schedule.segments:
        job = by_id.get(seg.job)
        if job is None:
            violations.append(f"segment references unknown job {seg.job}")
            continue
        if prev is not None and ctx.compare(seg.start, prev.end) is Verdict.LESS:
            violations.append(
                f"segments overlap: job {prev.job} until {prev.end}, "
                f"job {seg.job} from {seg.start}"
            )
        prev = seg
        if ctx.compare(seg.start, job.release) is Verdict.LESS:
            violations.append(f"job {seg.job} runs before its release")
        if require_due_dates and ctx.compare(seg.end, job.due) is Verdict.GREATER:
            violations.append(f"job {seg.job} runs past its due date")
        # The speed function is undefined before the release, so integrate
        # from there; the pre-release part was already flagged above.
        lo = seg.start if seg.start > job.release else job.release
        expect = work_in(job, lo, seg.end) if seg.end > lo else 0
        if not ctx.close(seg.work_done, expect):
            violations.append(
                f"job {seg.job} segment [{seg.start}, {seg.end}] claims "
                f"{seg.work_done} work; speed function gives {expect}"
            )
        placed[seg.job] = placed[seg.job] + seg.work_done
    for j in instance.jobs:
        cmp = ctx.compare(placed[j.id], j.work)
        if cmp is Verdict.LESS:
            incomplete[j.id] = j.work - placed[j.id]
            if require_due_dates:
                violations.append(f"job {j.id} is short {j.work - placed[j.id]} work")
        elif cmp is Verdict.GREATER:
            violations.append(f"job {j.id} overruns its work amount")
    return ValidationReport(not violations, violations, incomplete)


def brute_force_optimal(instance: Instance, resolution: int, ctx: PrecisionContext):
    """Least busy time over grid-restricted schedules (float64 search).

    Each job's window is cut into `resolution` equal slices; the grids
    are merged and every job order claims slices right to left until
    its work fits.  The minimum over orders upper-bounds the true
    optimal busy time and converges to it as the grid refines.  Only
    meant as an oracle for tiny instances; capped at four active jobs.
    """
    _check_sweepable(instance)
    if int(resolution) < 1:
        raise ValueError("resolution must be a positive integer")
    resolution = int(resolution)
    active = [j for j in instance.jobs if j.work > 0]
    if not active:
        return 0.0
    if len(active) > 4:
        raise UnsupportedInstanceError(
            "grid search over job orders is limited to four active jobs"
        )
    del ctx  # search runs in float64; precision context kept for signature parity

    points = set()
    for j in active:
        r, d = float(j.release), float(j.due)
        step = (d - r) / resolution
        for k in range(resolution + 1):
            points.add(r + k * step)
    pts = np.array(sorted(points), dtype=np.float64)
    left, right = pts[:-1], pts[1:]
    lengths = right - left

    n = len(active)
    inside = np.zeros((n, lengths.size), dtype=bool)
    works = np.zeros((n, lengths.size), dtype=np.float64)
    need = np.zeros(n, dtype=np.float64)
    for row, j in enumerate(active):
        r, d = float(j.release), float(j.due)
        mask = (left >= r) & (right <= d)
        inside[row] = mask
        m = float(j.speed.slope)
        works[row, mask] = m * ((right[mask] - r) ** 2 - (left[mask] - r) ** 2) / 2
        need[row] = float(j.work)

    best = None
    for perm in itertools.permutations(range(n)):
        order = np.array(perm, dtype=np.int64)
        feasible, busy = _accel.claim_sweep(works, lengths, inside, need, order)
        if feasible and (best is None or busy < best):
            best = busy
    if best is None:
        raise InfeasibleIntervalError(
            f"no job order fits the work at resolution {resolution}"
        )
    return best
