"""Event-driven simulation of online dispatch policies.

The simulator advances between events (releases, completions, stretch
crossings, idle-threshold activations) and re-evaluates the dispatch
rule at each one.  Between consecutive events the dispatched job is
constant, so simulation is exact up to the arithmetic: no time step,
no drift.  Everything is deterministic; rerunning a simulation from
scratch reproduces the same trace bit for bit, which is what lets an
adversary extend an instance mid-run and trust the prefix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .core import (
    DOUBLE,
    Instance,
    Job,
    NeverCompletesError,
    PrecisionContext,
    Schedule,
    SchedulingError,
    Segment,
    completion_from,
    speed_at,
    stretch,
    work_in,
)


class Policy(enum.Enum):
    FIFO = "fifo"
    EDD = "edd"
    SRPT = "srpt"
    LSSF = "lssf"
    THRASHING = "thrashing"


@dataclass(frozen=True)
class PolicySpec:
    """A dispatch rule plus its parameters.

    alpha is the stretch threshold below which the thrashing policy
    refuses to start a job.  speed_cap_factor, when set, caps every
    job's speed at factor * speed_at(job, job.due); None leaves the
    ramp unbounded.
    """

    kind: Policy
    alpha: object = 2
    speed_cap_factor: object = None

    def __post_init__(self):
        if not isinstance(self.kind, Policy):
            raise ValueError(f"unknown policy {self.kind!r}")
        if self.alpha < 1:
            raise ValueError("idle threshold below 1 would idle past due dates")
        if self.speed_cap_factor is not None and not self.speed_cap_factor > 0:
            raise ValueError("speed cap factor must be positive")


class EventKind(enum.Enum):
    RELEASE = "release"
    START = "start"
    PREEMPT = "preempt"
    COMPLETE = "complete"
    IDLE_BEGIN = "idle-begin"
    IDLE_END = "idle-end"


@dataclass(frozen=True)
class TraceEvent:
    time: object
    kind: EventKind
    job: int | None = None


@dataclass
class SimTrace:
    """Everything a simulation run produced.

    completions and stretches are keyed by job id; segments are the
    maximal uninterrupted runs, so busy_time equals the sum of their
    lengths.
    """

    instance: Instance
    policy: PolicySpec
    events: tuple
    completions: dict
    stretches: dict
    segments: tuple
    busy_time: object

    def as_schedule(self) -> Schedule:
        return Schedule(self.segments, direction="forward")


# --- capped speed helpers ----------------------------------------------------


def _cap_value(job: Job, factor):
    return factor * speed_at(job, job.due)


def effective_work_in(job: Job, a, b, cap_factor=None):
    """Work over [a, b] with the job's speed clipped at its cap."""
    if cap_factor is None:
        return work_in(job, a, b)
    cap = _cap_value(job, cap_factor)
    sp = job.speed
    if sp.slope == 0:
        return min(sp.base, cap) * (b - a)
    reach = sp.origin + (cap - sp.base) / sp.slope
    if reach <= a:
        return cap * (b - a)
    if reach >= b:
        return work_in(job, a, b)
    return work_in(job, a, reach) + cap * (b - reach)


def effective_completion_from(job: Job, start, remaining, ctx, cap_factor=None):
    """Finish time for `remaining` work from `start` under the speed cap."""
    if cap_factor is None:
        return completion_from(job, start, remaining, ctx)
    if remaining == 0:
        return start
    cap = _cap_value(job, cap_factor)
    sp = job.speed
    if sp.slope == 0:
        rate = min(sp.base, cap)
        if rate == 0:
            raise NeverCompletesError(f"job {job.id} has zero speed forever")
        return start + remaining / rate
    reach = sp.origin + (cap - sp.base) / sp.slope
    if start >= reach:
        return start + remaining / cap
    ramp_room = work_in(job, start, reach)
    if remaining <= ramp_room:
        return completion_from(job, start, remaining, ctx)
    return reach + (remaining - ramp_room) / cap


# --- policy primitives -------------------------------------------------------


def lssf_crossing(a: Job, b: Job, now):
    """First time strictly after `now` when the stretch lines of a and b meet.

    Stretch-so-far of job j is the line (t - r_j)/(d_j - r_j); two
    lines with distinct interval lengths meet exactly once.  Returns
    None when they are parallel or meet at or before `now`.
    """
    la, lb = a.length, b.length
    if la == lb:
        return None
    t = (a.release * lb - b.release * la) / (lb - la)
    return t if t > now else None


def thrashing_activation(job: Job, alpha):
    """Time at which the job's stretch-so-far reaches alpha."""
    return job.release + alpha * (job.due - job.release)


@dataclass
class SimState:
    """Dispatcher-visible snapshot: released unfinished jobs and progress."""

    jobs: dict
    remaining: dict
    released: set = field(default_factory=set)
    running: int | None = None
    activation: dict = field(default_factory=dict)
    ctx: PrecisionContext = None
    cap_factor: object = None


def next_dispatch(spec: PolicySpec, state: SimState, t):
    """Job id the policy runs at time t, or None to idle.

    Ties prefer the currently running job, then the lowest id, except
    that the stretch-so-far rule first prefers the faster-growing
    stretch (shorter interval): at the instant two stretch lines meet,
    the steeper one is about to lead, and picking it is what makes a
    takeover at the crossing actually happen.  Stretches within the
    context's comparison tolerance count as meeting; an exact test
    would let one ulp of roundoff at the crossing event mask the tie
    and silently skip the takeover.
    """
    cands = [state.jobs[i] for i in sorted(state.released)]
    if not cands:
        return None
    running = state.running
    kind = spec.kind
    if kind is Policy.FIFO:
        best = min(cands, key=lambda j: (j.release, j.id))
    elif kind is Policy.EDD:
        best = min(cands, key=lambda j: (j.due, j.id != running, j.id))
    elif kind is Policy.SRPT:
        def rpt(j):
            done_at = effective_completion_from(
                j, t, state.remaining[j.id], state.ctx, state.cap_factor
            )
            return done_at - t

        best = min(cands, key=lambda j: (rpt(j), j.id != running, j.id))
    elif kind is Policy.LSSF:
        ctx = state.ctx if state.ctx is not None else DOUBLE
        top = max(stretch_so_far(j, t) for j in cands)
        tied = [j for j in cands if ctx.close(stretch_so_far(j, t), top)]
        best = min(tied, key=lambda j: (j.length, j.id != running, j.id))
    elif kind is Policy.THRASHING:
        eligible = [j for j in cands if t >= state.activation[j.id]]
        if not eligible:
            return None
        best = min(eligible, key=lambda j: (-j.release, j.id != running, j.id))
    else:  # pragma: no cover
        raise ValueError(f"unhandled policy {kind}")
    return best.id


def stretch_so_far(job: Job, t):
    """Stretch the job would have if it completed right now."""
    return (t - job.release) / (job.due - job.release)


# --- the simulator -----------------------------------------------------------


def simulate(instance: Instance, spec: PolicySpec, ctx: PrecisionContext) -> SimTrace:
    """Run the policy on the instance until every job completes.

    Events at one timestamp are processed completion first, then
    releases, then the dispatch change they trigger, so event times in
    the trace are nondecreasing with a deterministic order inside a
    tie.
    """
    if not instance.jobs:
        raise ValueError("empty instance")
    order = instance.jobs
    n = len(order)
    state = SimState(
        jobs={j.id: j for j in order},
        remaining={},
        ctx=ctx,
        cap_factor=spec.speed_cap_factor,
    )
    if spec.kind is Policy.THRASHING:
        state.activation = {
            j.id: thrashing_activation(j, spec.alpha) for j in order
        }
    events = []
    segments = []
    completions = {}
    idx = 0
    seg_start = None
    idle_since = None

    def close_segment(job_id, end):
        if seg_start is not None and seg_start < end:
            job = state.jobs[job_id]
            done = effective_work_in(job, seg_start, end, spec.speed_cap_factor)
            segments.append(Segment(job_id, seg_start, end, done))

    def process_releases(t):
        nonlocal idx
        while idx < n and order[idx].release == t:
            j = order[idx]
            idx += 1
            events.append(TraceEvent(t, EventKind.RELEASE, j.id))
            if j.work == 0:
                completions[j.id] = t
                events.append(TraceEvent(t, EventKind.COMPLETE, j.id))
            else:
                state.released.add(j.id)
                state.remaining[j.id] = j.work

    def dispatch(t):
        nonlocal seg_start, idle_since
        choice = next_dispatch(spec, state, t)
        if choice is None:
            if state.running is not None:
                close_segment(state.running, t)
                seg_start = None
                events.append(TraceEvent(t, EventKind.PREEMPT, state.running))
                state.running = None
            if idle_since is None and len(completions) < n:
                idle_since = t
                events.append(TraceEvent(t, EventKind.IDLE_BEGIN))
            return
        if choice == state.running:
            return
        if state.running is not None:
            close_segment(state.running, t)
            seg_start = None
            events.append(TraceEvent(t, EventKind.PREEMPT, state.running))
        if idle_since is not None:
            idle_since = None
            events.append(TraceEvent(t, EventKind.IDLE_END))
        events.append(TraceEvent(t, EventKind.START, choice))
        seg_start = t
        state.running = choice

    t = order[0].release
    process_releases(t)
    dispatch(t)

    while len(completions) < n:
        finish_at = None
        horizon = []
        if idx < n:
            horizon.append(order[idx].release)
        if state.running is not None:
            job = state.jobs[state.running]
            finish_at = effective_completion_from(
                job, t, state.remaining[state.running], ctx, spec.speed_cap_factor
            )
            if finish_at < t:
                finish_at = t
            horizon.append(finish_at)
            if spec.kind is Policy.LSSF:
                for jid in state.released:
                    if jid == state.running:
                        continue
                    cross = lssf_crossing(job, state.jobs[jid], t)
                    if cross is not None:
                        horizon.append(cross)
        if spec.kind is Policy.THRASHING:
            for jid in state.released:
                when = state.activation[jid]
                if when > t:
                    horizon.append(when)
        if not horizon:
            raise SchedulingError(
                "simulation stalled with unfinished jobs and no upcoming event"
            )
        tn = min(horizon)
        if state.running is not None:
            rid = state.running
            if finish_at is not None and tn == finish_at:
                close_segment(rid, tn)
                seg_start = None
                state.running = None
                state.released.discard(rid)
                del state.remaining[rid]
                completions[rid] = tn
                events.append(TraceEvent(tn, EventKind.COMPLETE, rid))
            else:
                used = effective_work_in(
                    state.jobs[rid], t, tn, spec.speed_cap_factor
                )
                left = state.remaining[rid] - used
                state.remaining[rid] = left if left > 0 else 0
        t = tn
        process_releases(t)
        dispatch(t)

    stretches = {
        jid: stretch(state.jobs[jid], done) for jid, done in completions.items()
    }
    busy = 0
    for seg in segments:
        busy = busy + seg.length
    return SimTrace(
        instance=instance,
        policy=spec,
        events=tuple(events),
        completions=completions,
        stretches=stretches,
        segments=tuple(segments),
        busy_time=busy,
    )


def max_stretch(trace: SimTrace):
    """Largest interval stretch over the run; every job must have finished."""
    missing = [j.id for j in trace.instance.jobs if j.id not in trace.completions]
    if missing:
        raise SchedulingError(f"jobs {missing} never completed")
    return max(trace.stretches.values())


def busy_time_in_window(trace: SimTrace, lo, hi, contained_only: bool = False):
    """Machine-on time inside [lo, hi].

    With contained_only, counts only execution of jobs whose whole
    release-to-due window lies inside [lo, hi].
    """
    if hi < lo:
        raise ValueError("reversed window")
    total = 0
    for seg in trace.segments:
        if contained_only:
            job = trace.instance.job(seg.job)
            if job.release < lo or job.due > hi:
                continue
        a = seg.start if seg.start > lo else lo
        b = seg.end if seg.end < hi else hi
        if b > a:
            total = total + (b - a)
    return total
