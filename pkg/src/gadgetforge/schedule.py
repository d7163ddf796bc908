"""Rigid multi-machine schedules: verification, counting, swaps, audit.

A schedule assigns every job a start time and a set of machines (the job
occupies all of them for its whole length).  The central accounting tool is
the finished-before count  #_i S = |{j in S : start(j) + p(j) <= start(i)}|,
where jobs finishing exactly at start(i) are counted.  Swapping the contents
of two machines after a time point changes machine sets but never start
times, so every identity phrased in counts and starts is preserved by such
swaps; that is what makes the audit below meaningful for arbitrary
relabelings of a zero-idle schedule.

The audit checks, at the start of every 2- and 3-machine job, that each
digit of the decomposed start time equals the number of finished jobs on
that machine from the families contributing that digit, plus a handful of
cross-machine count identities.  For a feasible zero-idle schedule with the
target makespan these are theorems; for perturbed schedules the first
violated check pinpoints what broke.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .exactnum import decompose
from .reduction import SchedulingInstance, recognize

CHECKPOINT_TAGS = ("A", "B", "a", "b", "c")

# Which job families contribute one unit to each audited digit of a start
# time.  (The D^7 and unit digits are index- and value-dependent, so they
# are not audited digit-by-digit.)
DIGIT_FAMILIES: dict[int, tuple[str, ...]] = {
    2: ("A", "beta", "lambda2"),
    3: ("B", "alpha", "lambda1"),
    4: ("a", "beta", "delta"),
    5: ("b", "alpha", "gamma"),
    6: ("a", "b"),
    8: ("c", "alpha", "beta", "lambda1", "lambda2"),
}


class UnknownJob(KeyError):
    pass


class MachineOutOfRange(ValueError):
    pass


class CrossingJob(ValueError):
    """A job straddles the swap point on exactly one of the two machines."""

    def __init__(self, job_id: str, t: int, m1: int, m2: int):
        self.job_id = job_id
        super().__init__(
            f"job {job_id} crosses t={t} on exactly one of machines "
            f"{m1}/{m2}; swapping would tear it"
        )


class NotZeroIdle(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    starts: Mapping[str, int]
    machines: Mapping[str, frozenset[int]]

    def to_json(self) -> str:
        payload = {
            "starts": {k: str(v) for k, v in self.starts.items()},
            "machines": {k: sorted(v) for k, v in self.machines.items()},
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        payload = json.loads(text)
        return cls(
            starts={k: int(v) for k, v in payload["starts"].items()},
            machines={
                k: frozenset(int(m) for m in v)
                for k, v in payload["machines"].items()
            },
        )


@dataclass(frozen=True)
class VerifyReport:
    feasible: bool
    makespan: int
    idle: int
    contiguous: bool
    problems: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "makespan": str(self.makespan),
            "idle": str(self.idle),
            "contiguous": self.contiguous,
            "problems": list(self.problems),
        }


@dataclass(frozen=True)
class AuditCheck:
    checkpoint: str
    start: int
    machine: int | None
    kind: str
    expected: int | str
    observed: int | str
    ok: bool

    def to_dict(self) -> dict:
        return {
            "checkpoint": self.checkpoint,
            "start": str(self.start),
            "machine": self.machine,
            "kind": self.kind,
            "expected": str(self.expected),
            "observed": str(self.observed),
            "ok": self.ok,
        }


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    checks: tuple[AuditCheck, ...]

    @cached_property
    def violations(self) -> tuple[AuditCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)

    @property
    def first_violation(self) -> AuditCheck | None:
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": len(self.checks),
            "violations": [c.to_dict() for c in self.violations],
        }


def _check_job_universe(inst: SchedulingInstance, sched: Schedule) -> None:
    for job_id in sched.starts:
        if job_id not in inst.by_id:
            raise UnknownJob(f"schedule mentions unknown job {job_id!r}")
    for job in inst.jobs:
        if job.id not in sched.starts or job.id not in sched.machines:
            raise UnknownJob(f"job {job.id!r} is missing from the schedule")
    for job_id, machines in sched.machines.items():
        if job_id not in inst.by_id:
            raise UnknownJob(f"schedule mentions unknown job {job_id!r}")
        for m in machines:
            if not 1 <= m <= inst.m:
                raise MachineOutOfRange(
                    f"job {job_id!r} uses machine {m}, valid range is "
                    f"1..{inst.m}"
                )


def verify(inst: SchedulingInstance, sched: Schedule) -> VerifyReport:
    """Exact feasibility check: machine counts, overlaps, makespan, idle.

    Raises UnknownJob / MachineOutOfRange for malformed input; everything
    else (overlaps, wrong machine multiplicity, negative starts) is reported
    as problems with feasible=False.
    """
    _check_job_universe(inst, sched)
    problems: list[str] = []

    makespan = 0
    for job in inst.jobs:
        start = sched.starts[job.id]
        if start < 0:
            problems.append(f"job {job.id} starts at {start} < 0")
        used = sched.machines[job.id]
        if len(used) != job.q:
            problems.append(
                f"job {job.id} occupies {len(used)} machines, needs {job.q}"
            )
        makespan = max(makespan, start + job.p)

    per_machine: dict[int, list[tuple[int, int, str]]] = {
        m: [] for m in range(1, inst.m + 1)
    }
    for job in inst.jobs:
        start = sched.starts[job.id]
        for m in sched.machines[job.id]:
            per_machine[m].append((start, start + job.p, job.id))

    busy = {}
    for m, intervals in per_machine.items():
        intervals.sort()
        busy[m] = sum(end - start for start, end, _ in intervals)
        for (s1, e1, id1), (s2, e2, id2) in zip(intervals, intervals[1:]):
            if s2 < e1:
                problems.append(
                    f"jobs {id1} and {id2} overlap on machine {m} "
                    f"([{s1},{e1}) vs [{s2},{e2}))"
                )

    idle = inst.m * makespan - sum(busy.values())
    contiguous = all(
        not ms or max(ms) - min(ms) + 1 == len(ms)
        for ms in sched.machines.values()
    )
    return VerifyReport(
        feasible=not problems,
        makespan=makespan,
        idle=idle,
        contiguous=contiguous,
        problems=tuple(problems),
    )


def count_finished_by(
    inst: SchedulingInstance, sched: Schedule, t: int, job_ids: Iterable[str]
) -> int:
    """|{j : start(j) + p(j) <= t}| over the given ids."""
    total = 0
    for job_id in job_ids:
        job = inst.by_id.get(job_id)
        if job is None:
            raise UnknownJob(job_id)
        if sched.starts[job_id] + job.p <= t:
            total += 1
    return total


def count_before(
    inst: SchedulingInstance,
    sched: Schedule,
    anchor_id: str,
    job_ids: Iterable[str],
) -> int:
    """#_anchor S: members of S finished by the anchor job's start."""
    if anchor_id not in inst.by_id:
        raise UnknownJob(anchor_id)
    return count_finished_by(inst, sched, sched.starts[anchor_id], job_ids)


def swap_after(
    inst: SchedulingInstance, sched: Schedule, t: int, m1: int, m2: int
) -> Schedule:
    """Exchange the contents of two machines from time t onward.

    Start times never change.  Jobs ending by t are untouched; jobs starting
    at or after t trade m1 for m2 (those on both or neither keep their set);
    a job straddling t on exactly one of the two machines raises
    CrossingJob, because half a job cannot move.
    """
    for m in (m1, m2):
        if not 1 <= m <= inst.m:
            raise MachineOutOfRange(f"machine {m} out of 1..{inst.m}")
    _check_job_universe(inst, sched)

    new_machines: dict[str, frozenset[int]] = {}
    for job in inst.jobs:
        used = sched.machines[job.id]
        start = sched.starts[job.id]
        on1, on2 = m1 in used, m2 in used
        if on1 == on2 or start + job.p <= t:
            new_machines[job.id] = used
        elif start >= t:
            swapped = (used - {m1, m2}) | ({m2} if on1 else {m1})
            new_machines[job.id] = frozenset(swapped)
        else:
            raise CrossingJob(job.id, t, m1, m2)
    return Schedule(starts=dict(sched.starts), machines=new_machines)


def mirror(
    inst: SchedulingInstance, sched: Schedule, width: int | None = None
) -> Schedule:
    """Reverse time: start' = width - start - p.  An involution that keeps
    feasibility, makespan, idle, and machine sets."""
    _check_job_universe(inst, sched)
    if width is None:
        width = max(
            (sched.starts[j.id] + j.p for j in inst.jobs), default=0
        )
    starts = {
        job.id: width - sched.starts[job.id] - job.p for job in inst.jobs
    }
    return Schedule(starts=starts, machines=dict(sched.machines))


def audit(inst: SchedulingInstance, sched: Schedule) -> AuditReport:
    """Digit-level accounting of every 2- and 3-machine job's start time.

    Preconditions: `inst` must be a reduction instance, every job must be
    scheduled, and the schedule must have makespan W with zero arithmetic
    idle (NotZeroIdle otherwise).  Feasibility is deliberately not required:
    the counts are well defined even for overlapping schedules, which is
    what lets a perturbed schedule be audited and the first broken identity
    reported.
    """
    if recognize(inst) is None:
        raise ValueError("audit requires an unmodified reduction instance")
    _check_job_universe(inst, sched)

    makespan = max(sched.starts[j.id] + j.p for j in inst.jobs)
    idle = inst.m * makespan - inst.total_work
    if makespan != inst.W or idle != 0:
        raise NotZeroIdle(
            f"makespan {makespan} with arithmetic idle {idle}; audit needs "
            f"makespan {inst.W} and zero idle"
        )

    ends = {j.id: sched.starts[j.id] + j.p for j in inst.jobs}
    ids_by_tag: dict[str, list[str]] = {}
    for job in inst.jobs:
        ids_by_tag.setdefault(job.tag, []).append(job.id)

    def finished(t: int, tags: Iterable[str], machine: int | None = None) -> int:
        total = 0
        for tag in tags:
            for job_id in ids_by_tag.get(tag, ()):
                if ends[job_id] > t:
                    continue
                if machine is None or machine in sched.machines[job_id]:
                    total += 1
        return total

    checks: list[AuditCheck] = []
    checkpoints = sorted(
        (j for j in inst.jobs if j.tag in CHECKPOINT_TAGS),
        key=lambda j: (sched.starts[j.id], j.id),
    )
    for job in checkpoints:
        start = sched.starts[job.id]
        try:
            cv = decompose(start, inst.z, inst.D)
        except ValueError as exc:
            checks.append(
                AuditCheck(
                    checkpoint=job.id,
                    start=start,
                    machine=None,
                    kind="decompose",
                    expected="clean decomposition",
                    observed=str(exc),
                    ok=False,
                )
            )
            continue
        for m in sorted(sched.machines[job.id]):
            for power, families in DIGIT_FAMILIES.items():
                expected = cv.digit(power)
                observed = finished(start, families, machine=m)
                checks.append(
                    AuditCheck(
                        checkpoint=job.id,
                        start=start,
                        machine=m,
                        kind=f"load:x{power}",
                        expected=expected,
                        observed=observed,
                        ok=expected == observed,
                    )
                )
        checks.extend(_checkpoint_equations(job, start, finished))

    passed = all(c.ok for c in checks)
    return AuditReport(passed=passed, checks=tuple(checks))


def _checkpoint_equations(job, start, finished) -> list[AuditCheck]:
    """Cross-machine count identities tied to the checkpoint's family."""
    n = lambda *tags: finished(start, tags)
    if job.tag == "A":
        chain = [
            ("count(c) - count(lambda1)", n("c") - n("lambda1")),
            ("count(B) - count(lambda1)", n("B") - n("lambda1")),
            ("count(alpha)", n("alpha")),
            ("count(b)", n("b")),
            ("count(a)", n("a")),
        ]
    elif job.tag == "B":
        chain = [
            ("count(c) - count(lambda2)", n("c") - n("lambda2")),
            ("count(A) - count(lambda2)", n("A") - n("lambda2")),
            ("count(beta)", n("beta")),
            ("count(a)", n("a")),
            ("count(b)", n("b")),
        ]
    elif job.tag == "a":
        chain = [
            ("count(B)", n("B")),
            ("count(alpha) + count(lambda1)", n("alpha") + n("lambda1")),
            ("count(c)", n("c")),
        ]
    elif job.tag == "b":
        chain = [
            ("count(A)", n("A")),
            ("count(beta) + count(lambda2)", n("beta") + n("lambda2")),
            ("count(c)", n("c")),
        ]
    else:  # c
        chain = [("count(b)", n("b")), ("count(a)", n("a"))]

    checks = []
    (_, base_value) = chain[0]
    base_name = chain[0][0]
    for name, value in chain[1:]:
        checks.append(
            AuditCheck(
                checkpoint=job.id,
                start=start,
                machine=None,
                kind=f"eq:{job.tag}[{base_name} = {name}]",
                expected=base_value,
                observed=value,
                ok=base_value == value,
            )
        )
    return checks
