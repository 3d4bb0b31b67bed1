"""Instance generators: adversarial families, reductions, random corpora.

The adversarial families are built by co-simulation: each generator
chases the policy's own dynamics (takeover points, completion chains,
observed lateness) rather than hard-coding closed forms, then verifies
the achieved stretch by simulating the finished instance.  All of them
produce instances the backward sweep certifies feasible, so the bad
stretch is the policy's fault, not the instance's.

Where a construction needs exact boundary algebra (a job that fills
its window with zero slack), intervals are re-derived from the stored
endpoints after rounding so that d - r, and hence the feasibility
discriminant, is exact in the working precision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal

from .core import (
    Instance,
    PrecisionContext,
    Schedule,
    SchedulingError,
    Segment,
    Verdict,
    lazy_job,
    nonlazy_job,
    rightmost_running_time,
    work_in,
)
from .offline import Feasibility, FeasibilityVerdict, lrtb
from .online import Policy, PolicySpec, max_stretch, simulate

__all__ = [
    "SsrQuery",
    "AdversaryOutcome",
    "gen_srpt",
    "gen_lssf",
    "gen_fifo",
    "gen_edd",
    "gen_random_feasible",
    "reduce_ssr",
    "check_reduction",
    "adaptive_adversary",
]


# --- decimal rationalization -------------------------------------------------


def _round_decimal(value, rel, ctx, up: bool):
    """Nearest decimal within relative distance `rel`, rounded outward."""
    if value == 0:
        return value
    mag = abs(value)
    exponent = math.floor(math.log10(float(mag * rel)))
    quantum = Decimal(1).scaleb(exponent)
    dec = Decimal(ctx.format(value))
    mode = ROUND_CEILING if up else ROUND_FLOOR
    return ctx.parse(str(dec.quantize(quantum, rounding=mode)))


# --- worst-case families -----------------------------------------------------


def gen_srpt(n: int, ctx: PrecisionContext, rationalize=None) -> Instance:
    """Family where shortest-remaining-time starves the long job.

    One unit of work due at 2, plus n-1 half-unit jobs with a far due
    date, all released at 0.  The half-unit jobs always look shorter,
    so they run back to back, completing at 1, sqrt(2), ..., sqrt(n-1);
    the unit job finishes at sqrt(n+1), stretch sqrt(n+1)/2.
    """
    if n < 2:
        raise ValueError("need at least two jobs")
    far = ctx.sqrt(n) + 2
    if rationalize is not None:
        far = _round_decimal(far, ctx.real(rationalize), ctx, up=True)
    half = ctx.real(1) / 2
    jobs = [lazy_job(1, ctx.real(0), ctx.real(2), ctx.real(1))]
    for k in range(2, n + 1):
        jobs.append(lazy_job(k, ctx.real(0), far, half))
    return Instance(
        tuple(jobs),
        name=f"srpt-starve-{n}",
        provenance=f"gen_srpt(n={n})",
    )


def gen_lssf(
    n: int, ctx: PrecisionContext, takeover=None, rationalize=None
) -> Instance:
    """Cascade in which greedy stretch-chasing snowballs to sqrt(n-1).

    Job 2 overtakes the long job 1 at a small stretch s, finishing
    late; from job 3 on, each job's window is sized so its
    stretch-so-far when it finally starts is exactly sqrt(j-2), making
    it complete at stretch sqrt(j-1).  Every window from job 3 on is
    full (work = length^2/2), so the backward sweep certifies
    feasibility with zero slack but exact arithmetic.
    """
    if n < 3:
        raise ValueError("the cascade needs at least three jobs")
    s = ctx.real(takeover) if takeover is not None else ctx.real(1) / 4
    if not 0 < s < 1:
        raise ValueError("takeover stretch must lie in (0, 1)")
    r1 = ctx.real(-1)
    d1 = 1 / s  # crossing of (t - r1)/(d1 - r1) with t/1 lands exactly at s
    one = ctx.real(1)

    jobs = [lazy_job(2, ctx.real(0), one, one / 2)]
    completion = ctx.sqrt(1 + s * s)  # job 2 runs [s, C2]
    releases_dues = [(ctx.real(0), one)]
    for j in range(3, n + 1):
        r = releases_dues[-1][1]
        q = ctx.sqrt(j - 2)  # stretch-so-far target at takeover
        width = (completion - r) / q
        if rationalize is not None:
            width = _round_decimal(width, ctx.real(rationalize), ctx, up=True)
        d = r + width
        width = d - r  # exact at working precision; keeps the window full
        w = width * width / 2
        if rationalize is not None:
            w = _round_decimal(w, ctx.real(rationalize), ctx, up=False)
        jobs.append(lazy_job(j, r, d, w))
        releases_dues.append((r, d))
        completion = r + ctx.sqrt(j - 1) * width

    # Job 1 runs [-1, s], is overtaken, and resumes after the cascade.
    early = (s - r1) * (s - r1) / 2
    tail_start = completion
    probe = lazy_job(1, r1, d1, one)  # geometry only; work set below
    tail = work_in(probe, tail_start, d1)
    if tail <= 0:
        raise SchedulingError("cascade ran past the long job's due date")
    w1 = early + tail / 2
    jobs.insert(0, lazy_job(1, r1, d1, w1))
    return Instance(
        tuple(jobs),
        name=f"lssf-cascade-{n}",
        provenance=f"gen_lssf(n={n})",
    )


def _verified_family(build, policy_spec, target, ctx, tries=8):
    """Shrink the knob until the simulated stretch reaches the target."""
    knob = None
    for _ in range(tries):
        inst, knob = build(knob)
        sched, verdict = lrtb(inst, ctx)
        if verdict.status is not Feasibility.FEASIBLE:
            raise SchedulingError(
                f"generated instance {inst.name} not certified feasible"
            )
        trace = simulate(inst, policy_spec, ctx)
        if max_stretch(trace) >= target:
            return inst
        knob = knob / 2
    raise SchedulingError("could not reach the target stretch")


def gen_fifo(target, ctx: PrecisionContext) -> Instance:
    """First-in-first-out forced to stretch a sliver job past `target`.

    A long job due comfortably late runs first and completes exactly
    at 2; a sliver released at 1 with window width delta then waits a
    full unit, giving stretch sqrt(1 + delta^2)/delta > 1/delta.
    """
    target = ctx.real(target)
    if not target > 1:
        raise ValueError("target stretch must exceed 1")

    def build(delta):
        if delta is None:
            delta = ctx.real(2) ** -math.ceil(math.log2(float(target)))
        jobs = (
            lazy_job(1, ctx.real(0), ctx.real(3), ctx.real(2)),
            lazy_job(2, ctx.real(1), 1 + delta, delta * delta / 2),
        )
        return (
            Instance(
                jobs,
                name=f"fifo-sliver-{ctx.format(target)}",
                provenance=f"gen_fifo(target={ctx.format(target)})",
            ),
            delta,
        )

    return _verified_family(build, PolicySpec(Policy.FIFO), target, ctx)


def gen_edd(target, ctx: PrecisionContext) -> Instance:
    """Earliest-due-date forced to stretch a sliver job past `target`.

    Jobs 1 and 2 fill the prefix so tightly that serving job 2 first
    (its due date is earlier) leaves job 1 finishing late by a fixed
    amount; a sliver job due just after job 1 then inherits that
    lateness across a window of width lateness/target.
    """
    target = ctx.real(target)
    if not target > 1:
        raise ValueError("target stretch must exceed 1")
    pair = (
        lazy_job(1, ctx.real(0), ctx.real(2), ctx.real(53) / 32),
        lazy_job(2, ctx.real(1), ctx.real(3) / 2, ctx.real(3) / 32),
    )
    rehearsal = simulate(Instance(pair), PolicySpec(Policy.EDD), ctx)
    lateness = rehearsal.completions[1] - 2
    if not lateness > 0:
        raise SchedulingError("prefix failed to delay the anchor job")

    def build(delta):
        if delta is None:
            delta = lateness / target
        jobs = pair + (
            lazy_job(3, ctx.real(2), 2 + delta, delta * delta / 4),
        )
        return (
            Instance(
                jobs,
                name=f"edd-sliver-{ctx.format(target)}",
                provenance=f"gen_edd(target={ctx.format(target)})",
            ),
            delta,
        )

    return _verified_family(build, PolicySpec(Policy.EDD), target, ctx)


def gen_random_feasible(n: int, seed: int, ctx: PrecisionContext) -> Instance:
    """Random instance the backward sweep certifies feasible.

    Draws windows and work fractions from a seeded RNG, then shrinks
    work (and eventually redraws) until the feasibility verdict is
    decisive.  Deterministic in (n, seed).
    """
    if n < 1:
        raise ValueError("need at least one job")
    rng = random.Random(seed)
    for _attempt in range(40):
        jobs = []
        for i in range(1, n + 1):
            r = rng.uniform(0, n)
            width = rng.uniform(0.5, 2.5)
            slope = rng.choice([0.5, 1.0, 2.0])
            frac = rng.uniform(0.1, 0.6)
            work = frac * slope * width * width / 2
            jobs.append(
                lazy_job(
                    i,
                    ctx.real(r),
                    ctx.real(r) + ctx.real(width),
                    ctx.real(work),
                    slope=ctx.real(slope),
                )
            )
        for _shrink in range(8):
            inst = Instance(
                tuple(jobs),
                name=f"random-{n}-{seed}",
                provenance=f"gen_random_feasible(n={n}, seed={seed})",
            )
            _, verdict = lrtb(inst, ctx)
            if verdict.status is Feasibility.FEASIBLE:
                return inst
            jobs = [
                lazy_job(j.id, j.release, j.due, j.work * 3 / 4, slope=j.speed.slope)
                for j in jobs
            ]
    raise SchedulingError(f"no feasible draw for n={n}, seed={seed}")


# --- sum-of-square-roots reduction -------------------------------------------


@dataclass(frozen=True)
class SsrQuery:
    """Decide whether sum(sqrt(x)) >= threshold for positive integers x."""

    xs: tuple
    threshold: int

    def __post_init__(self):
        xs = tuple(int(x) for x in self.xs)
        object.__setattr__(self, "xs", xs)
        if not xs or any(x < 1 for x in xs):
            raise ValueError("xs must be positive integers")
        if int(self.threshold) < 1:
            raise ValueError("threshold must be a positive integer")
        object.__setattr__(self, "threshold", int(self.threshold))


def reduce_ssr(query: SsrQuery, ctx: PrecisionContext) -> Instance:
    """Scheduling instance feasible iff sum(sqrt(x_i)) >= threshold.

    Surd i becomes a ramp job with window length x_i + 2 and work
    (x_i^2 + 3x_i + 4)/2: pushed flush against its due date it runs
    for exactly (x_i + 2) - sqrt(x_i), leaving sqrt(x_i) of idle room
    in its window.  Windows tile [0, sum(x_i + 2)]; a constant-speed
    filler job due at the end needs `threshold` units of that room.
    """
    jobs = []
    t = ctx.real(0)
    for i, x in enumerate(query.xs, start=1):
        length = ctx.real(x + 2)
        w = ctx.real(x * x + 3 * x + 4) / 2
        jobs.append(lazy_job(i, t, t + length, w))
        t = t + length
    filler = len(query.xs) + 1
    jobs.append(nonlazy_job(filler, ctx.real(0), t, ctx.real(query.threshold)))
    xs_text = ",".join(str(x) for x in query.xs)
    return Instance(
        tuple(jobs),
        name=f"ssr-{len(query.xs)}",
        provenance=f"reduce_ssr(xs=[{xs_text}], threshold={query.threshold})",
    )


def recover_ssr_query(instance: Instance):
    """Recognize an instance produced by reduce_ssr; None if it is not one.

    The shape is strict: unit-slope ramp jobs tiling [0, T] with the
    integer window/work pattern of the reduction, plus one unit-speed
    constant job spanning the whole horizon with integer work.
    """
    fillers = [j for j in instance.jobs if j.speed.slope == 0]
    surds = [j for j in instance.jobs if j.speed.slope != 0]
    if len(fillers) != 1 or not surds:
        return None
    filler = fillers[0]
    if filler.speed.base != 1 or filler.release != 0:
        return None
    if filler.work != int(filler.work) or int(filler.work) < 1:
        return None
    surds = sorted(surds, key=lambda j: j.release)
    cursor = 0
    xs = []
    for j in surds:
        if j.speed.slope != 1 or j.speed.base != 0 or j.release != cursor:
            return None
        length = j.due - j.release
        if length != int(length):
            return None
        x = int(length) - 2
        if x < 1 or j.work * 2 != x * x + 3 * x + 4:
            return None
        xs.append(x)
        cursor = j.due
    if filler.due != cursor:
        return None
    return SsrQuery(tuple(xs), int(filler.work))


def check_reduction(query: SsrQuery, ctx: PrecisionContext) -> FeasibilityVerdict:
    """Feasibility verdict for the reduced instance.

    All-perfect-square queries resolve exactly through integer square
    roots.  Otherwise the surd sum is compared at working precision;
    a difference inside tolerance yields Indeterminate, since equality
    of an irrational sum cannot be certified numerically.
    """
    roots = [math.isqrt(x) for x in query.xs]
    threshold = query.threshold
    if all(r * r == x for r, x in zip(roots, query.xs)):
        total = sum(roots)
        margin = ctx.real(abs(total - threshold))
        if total >= threshold:
            return FeasibilityVerdict(
                Feasibility.FEASIBLE, _reduction_witness(query, ctx), {}, margin
            )
        deficit = ctx.real(threshold - total)
        return FeasibilityVerdict(
            Feasibility.INFEASIBLE, None, {len(query.xs) + 1: deficit}, margin
        )
    total = ctx.real(0)
    for x in query.xs:
        total = total + ctx.sqrt(x)
    margin = abs(total - threshold)
    cmp = ctx.compare(total, ctx.real(threshold))
    if cmp is Verdict.GREATER:
        return FeasibilityVerdict(
            Feasibility.FEASIBLE, _reduction_witness(query, ctx), {}, margin
        )
    if cmp is Verdict.LESS:
        deficit = ctx.real(threshold) - total
        return FeasibilityVerdict(
            Feasibility.INFEASIBLE, None, {len(query.xs) + 1: deficit}, margin
        )
    return FeasibilityVerdict(Feasibility.INDETERMINATE, None, {}, margin)


def _reduction_witness(query: SsrQuery, ctx: PrecisionContext) -> Schedule:
    """Push every surd job flush right, pour the filler into the gaps."""
    inst = reduce_ssr(query, ctx)
    by_id = {j.id: j for j in inst.jobs}
    filler = by_id[len(query.xs) + 1]
    segments = []
    gaps = []
    for i in range(1, len(query.xs) + 1):
        job = by_id[i]
        t = rightmost_running_time(job.length, job.work, ctx)
        lo = job.due - t
        segments.append(Segment(job.id, lo, job.due, job.work))
        if lo > job.release:
            gaps.append((job.release, lo))
    left = ctx.real(query.threshold)
    for lo, hi in gaps:
        if left <= 0:
            break
        room = hi - lo
        if room >= left:
            segments.append(Segment(filler.id, lo, lo + left, left))
            left = 0
        else:
            segments.append(Segment(filler.id, lo, hi, room))
            left = left - room
    return Schedule(tuple(segments), direction="forward")


# --- adaptive adversary ------------------------------------------------------


@dataclass(frozen=True)
class AdversaryOutcome:
    instance: Instance
    trace: object
    missed: bool
    branch: str


_SEED_LONG = ("0", "10", "26.984375")  # release, due, work
_SEED_TIGHT = ("2", "4", "1.5")
_PROBE_TIME = 2


def adaptive_adversary(spec: PolicySpec, ctx: PrecisionContext) -> AdversaryOutcome:
    """Watch the policy on a two-job seed, then add the job it cannot absorb.

    The seed pairs a long, work-heavy job with a tight one released at
    t=2.  A policy serving the tight job then is starved of the late
    cheap hours the long job needs, so a zero-slack job dropped into
    [5, 8] overloads it; a policy still on the long job (or idling) is
    running it during hours a tight sliver at [2.25, 3.03125] needed.
    Either extension stays feasible for the backward sweep.  Since
    simulation is deterministic and policies cannot see unreleased
    jobs, rerunning on the extended instance reproduces the observed
    prefix exactly.
    """
    seed_jobs = (
        lazy_job(1, *(ctx.parse(v) for v in _SEED_LONG)),
        lazy_job(2, *(ctx.parse(v) for v in _SEED_TIGHT)),
    )
    rehearsal = simulate(Instance(seed_jobs), spec, ctx)
    probe = ctx.real(_PROBE_TIME)
    running = None
    for seg in rehearsal.segments:
        if seg.start <= probe < seg.end:
            running = seg.job
            break
    if running == 2:
        extra = lazy_job(4, ctx.real(5), ctx.real(8), ctx.real("4.5"))
        branch = "starve-late-hours"
    else:
        extra = lazy_job(
            3, ctx.parse("2.25"), ctx.parse("3.03125"), ctx.parse("0.3046875")
        )
        branch = "occupy-sliver-window"
    inst = Instance(
        seed_jobs + (extra,),
        name=f"adversary-{spec.kind.value}",
        provenance=f"adaptive_adversary(policy={spec.kind.value}, branch={branch})",
    )
    trace = simulate(inst, spec, ctx)
    missed = False
    for j in inst.jobs:
        if ctx.compare(trace.completions[j.id], j.due) is Verdict.GREATER:
            missed = True
            break
    return AdversaryOutcome(inst, trace, missed, branch)
