"""JSON file formats for instances, schedules, and traces.

Numeric fields are exact decimal strings produced by the precision
context, so save/load round-trips are bit-identical at a given
precision and files written at high precision do not silently decay
to doubles.  Parsers report the JSON location for syntax errors and
the offending field for schema errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .core import Instance, Job, PrecisionContext, Schedule, SpeedFunction
from .offline import FeasibilityVerdict, total_busy_time
from .online import EventKind, Policy, PolicySpec, SimTrace

SCHEMA_VERSION = 1


class FileFormatError(ValueError):
    """Malformed instance/trace/schedule file."""


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror or exc}") from exc


def _expect(record, field, kinds, where):
    if field not in record:
        raise FileFormatError(f"{where}: missing field {field!r}")
    value = record[field]
    if not isinstance(value, kinds):
        raise FileFormatError(f"{where}: field {field!r} has the wrong type")
    return value


def _parse_number(text, ctx, where, field):
    if not isinstance(text, str):
        raise FileFormatError(
            f"{where}: field {field!r} must be a decimal string, got {type(text).__name__}"
        )
    try:
        return ctx.parse(text)
    except (ValueError, ArithmeticError) as exc:
        raise FileFormatError(f"{where}: field {field!r}: {exc}") from exc


def _check_schema(record, path, kind):
    version = _expect(record, "schema_version", int, path)
    if version != SCHEMA_VERSION:
        raise FileFormatError(f"{path}: unsupported schema_version {version}")
    found = _expect(record, "kind", str, path)
    if found != kind:
        raise FileFormatError(f"{path}: expected a {kind} file, found {found!r}")


# --- instances ---------------------------------------------------------------


def instance_to_record(instance: Instance, ctx: PrecisionContext) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "instance",
        "name": instance.name,
        "provenance": instance.provenance,
        "precision_bits": ctx.bits,
        "jobs": [
            {
                "id": j.id,
                "release": ctx.format(j.release),
                "due": ctx.format(j.due),
                "work": ctx.format(j.work),
                "base": ctx.format(j.speed.base),
                "slope": ctx.format(j.speed.slope),
            }
            for j in instance.jobs
        ],
    }


def save_instance(instance: Instance, path, ctx: PrecisionContext):
    with open(path, "w") as fh:
        json.dump(instance_to_record(instance, ctx), fh, indent=2)
        fh.write("\n")


def load_instance(path, ctx: PrecisionContext) -> Instance:
    record = _read_json(path)
    _check_schema(record, path, "instance")
    rows = _expect(record, "jobs", list, path)
    jobs = []
    for i, row in enumerate(rows):
        where = f"{path}: jobs[{i}]"
        if not isinstance(row, dict):
            raise FileFormatError(f"{where}: expected an object")
        jid = _expect(row, "id", int, where)
        release = _parse_number(row.get("release"), ctx, where, "release")
        due = _parse_number(row.get("due"), ctx, where, "due")
        work = _parse_number(row.get("work"), ctx, where, "work")
        base = _parse_number(row.get("base", "0"), ctx, where, "base")
        slope = _parse_number(row.get("slope", "1"), ctx, where, "slope")
        try:
            jobs.append(Job(jid, release, due, work, SpeedFunction(base, slope, release)))
        except ValueError as exc:
            raise FileFormatError(f"{where}: {exc}") from exc
    if not jobs:
        raise FileFormatError(f"{path}: instance has no jobs")
    try:
        return Instance(
            tuple(jobs),
            name=str(record.get("name", "")),
            provenance=str(record.get("provenance", "")),
        )
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


# --- schedules ---------------------------------------------------------------


def schedule_to_record(
    instance: Instance,
    schedule: Schedule,
    verdict: FeasibilityVerdict,
    ctx: PrecisionContext,
) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "schedule",
        "instance": instance.name,
        "precision_bits": ctx.bits,
        "verdict": {
            "status": verdict.status.value,
            "margin": None if verdict.margin is None else ctx.format(verdict.margin),
            "deficits": {
                str(jid): ctx.format(v) for jid, v in sorted(verdict.deficits.items())
            },
        },
        "busy_time": ctx.format(total_busy_time(schedule)),
        "segments": [
            {
                "job": s.job,
                "start": ctx.format(s.start),
                "end": ctx.format(s.end),
                "work": ctx.format(s.work_done),
            }
            for s in schedule.segments
        ],
    }


def save_schedule(instance, schedule, verdict, path, ctx):
    with open(path, "w") as fh:
        json.dump(schedule_to_record(instance, schedule, verdict, ctx), fh, indent=2)
        fh.write("\n")


# --- traces ------------------------------------------------------------------


@dataclass
class TraceRecord:
    """A trace as loaded from disk, after self-consistency checks."""

    instance_name: str
    policy: PolicySpec
    events: list
    completions: dict
    stretches: dict
    max_stretch: object
    busy_time: object
    missed: list


def trace_to_record(trace: SimTrace, ctx: PrecisionContext) -> dict:
    inst = trace.instance
    missed = [
        j.id
        for j in inst.jobs
        if trace.completions[j.id] > j.due
    ]
    spec = trace.policy
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "trace",
        "precision_bits": ctx.bits,
        "instance": {
            "name": inst.name,
            "jobs": [
                {
                    "id": j.id,
                    "release": ctx.format(j.release),
                    "due": ctx.format(j.due),
                }
                for j in inst.jobs
            ],
        },
        "policy": {
            "kind": spec.kind.value,
            "alpha": ctx.format(spec.alpha),
            "speed_cap_factor": (
                None
                if spec.speed_cap_factor is None
                else ctx.format(spec.speed_cap_factor)
            ),
        },
        "events": [
            {
                "time": ctx.format(e.time),
                "kind": e.kind.value,
                "job": e.job,
            }
            for e in trace.events
        ],
        "summary": {
            "completions": {
                str(jid): ctx.format(t) for jid, t in sorted(trace.completions.items())
            },
            "stretches": {
                str(jid): ctx.format(s) for jid, s in sorted(trace.stretches.items())
            },
            "max_stretch": ctx.format(max(trace.stretches.values())),
            "busy_time": ctx.format(trace.busy_time),
            "missed_due_dates": missed,
        },
    }


def save_trace(trace: SimTrace, path, ctx: PrecisionContext):
    with open(path, "w") as fh:
        json.dump(trace_to_record(trace, ctx), fh, indent=2)
        fh.write("\n")


def load_trace(path, ctx: PrecisionContext) -> TraceRecord:
    """Load a trace and recompute its summary from the event stream.

    The stored summary is rejected if it disagrees with what the
    events imply, so a trace file cannot drift from its own log.
    """
    record = _read_json(path)
    _check_schema(record, path, "trace")
    # The stored summary is only as accurate as the precision that wrote
    # it, so self-checks run at the coarser of the two tolerances.
    file_bits = record.get("precision_bits")
    check = ctx
    if isinstance(file_bits, int) and 24 <= file_bits < ctx.bits:
        check = PrecisionContext(bits=file_bits)
    inst_block = _expect(record, "instance", dict, path)
    windows = {}
    for i, row in enumerate(_expect(inst_block, "jobs", list, path)):
        where = f"{path}: instance.jobs[{i}]"
        jid = _expect(row, "id", int, where)
        windows[jid] = (
            _parse_number(row.get("release"), ctx, where, "release"),
            _parse_number(row.get("due"), ctx, where, "due"),
        )
    pol = _expect(record, "policy", dict, path)
    try:
        kind = Policy(_expect(pol, "kind", str, f"{path}: policy"))
    except ValueError as exc:
        raise FileFormatError(f"{path}: unknown policy kind") from exc
    cap = pol.get("speed_cap_factor")
    spec = PolicySpec(
        kind,
        alpha=_parse_number(pol.get("alpha", "2"), ctx, f"{path}: policy", "alpha"),
        speed_cap_factor=(
            None if cap is None else _parse_number(cap, ctx, f"{path}: policy", "cap")
        ),
    )
    events = []
    for i, row in enumerate(_expect(record, "events", list, path)):
        where = f"{path}: events[{i}]"
        t = _parse_number(row.get("time"), ctx, where, "time")
        try:
            kind_ev = EventKind(_expect(row, "kind", str, where))
        except ValueError as exc:
            raise FileFormatError(f"{where}: unknown event kind") from exc
        events.append((t, kind_ev, row.get("job")))

    # replay the event stream
    completions = {}
    busy = ctx.real(0)
    open_run = None
    last_t = None
    for t, kind_ev, jid in events:
        if last_t is not None and t < last_t:
            raise FileFormatError(f"{path}: events go backward in time")
        last_t = t
        if kind_ev is EventKind.START:
            if open_run is not None:
                raise FileFormatError(f"{path}: start while job {open_run[0]} runs")
            open_run = (jid, t)
        elif kind_ev in (EventKind.PREEMPT, EventKind.COMPLETE):
            if open_run is not None and open_run[0] == jid:
                busy = busy + (t - open_run[1])
                open_run = None
            elif kind_ev is EventKind.PREEMPT:
                raise FileFormatError(f"{path}: preempt of a job that is not running")
            if kind_ev is EventKind.COMPLETE:
                completions[jid] = t
    if open_run is not None:
        raise FileFormatError(f"{path}: trace ends while job {open_run[0]} runs")

    summary = _expect(record, "summary", dict, path)
    stored_busy = _parse_number(
        summary.get("busy_time"), ctx, f"{path}: summary", "busy_time"
    )
    if not check.close(stored_busy, busy):
        raise FileFormatError(
            f"{path}: summary busy_time {stored_busy} disagrees with events ({busy})"
        )
    stretches = {}
    stored_completions = _expect(summary, "completions", dict, f"{path}: summary")
    for jid_text, c_text in stored_completions.items():
        jid = int(jid_text)
        c = _parse_number(c_text, ctx, f"{path}: summary.completions", jid_text)
        if jid not in completions or not check.close(completions[jid], c):
            raise FileFormatError(
                f"{path}: summary completion of job {jid} disagrees with events"
            )
        r, d = windows[jid]
        stretches[jid] = (c - r) / (d - r)
    stored_stretches = _expect(summary, "stretches", dict, f"{path}: summary")
    for jid_text, s_text in stored_stretches.items():
        jid = int(jid_text)
        s = _parse_number(s_text, ctx, f"{path}: summary.stretches", jid_text)
        if not check.close(stretches[jid], s):
            raise FileFormatError(
                f"{path}: summary stretch of job {jid} disagrees with events"
            )
    return TraceRecord(
        instance_name=str(inst_block.get("name", "")),
        policy=spec,
        events=events,
        completions=completions,
        stretches=stretches,
        max_stretch=max(stretches.values()) if stretches else None,
        busy_time=busy,
        missed=list(summary.get("missed_due_dates", [])),
    )


# --- plot data ---------------------------------------------------------------


def write_plot_data(trace: SimTrace, path, ctx: PrecisionContext):
    """Two CSVs: per-job summary at `path`, Gantt rows alongside it.

    The Gantt file name is the summary name with a .gantt.csv suffix.
    """
    path = str(path)
    gantt_path = (
        path[: -len(".csv")] + ".gantt.csv" if path.endswith(".csv") else path + ".gantt.csv"
    )
    with open(path, "w") as fh:
        fh.write("job,release,due,completion,stretch\n")
        for j in trace.instance.jobs:
            fh.write(
                f"{j.id},{ctx.format(j.release)},{ctx.format(j.due)},"
                f"{ctx.format(trace.completions[j.id])},"
                f"{ctx.format(trace.stretches[j.id])}\n"
            )
    with open(gantt_path, "w") as fh:
        fh.write("job,start,end\n")
        for seg in trace.segments:
            fh.write(f"{seg.job},{ctx.format(seg.start)},{ctx.format(seg.end)}\n")
    return gantt_path
