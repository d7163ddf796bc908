"""Canonical zero-idle schedule (and packing) from a 3-Partition witness.

The layout is accumulated machine by machine rather than taken from closed
forms: each machine gets its job sequence, and a small event loop places the
next job whose turn has come on all of its machines at once, asserting that
those machines agree on the time.  Agreement is guaranteed exactly because
every witness triple sums to D; the closed-form starts are derived elsewhere
and the test suite checks the two constructions coincide.

Machine sequences (block i runs 1..z, P(i) is the i-th witness triple sorted
by value):

    machine 1:  lambda1, A_0 | a_i, alpha_i, A_i
    machine 2:  B_0, c_0, A_0 | a_i, gamma_i, P(i)..., B_i, c_i, A_i
    machine 3:  B_0, c_0, A_0 | delta_i, b_i, B_i, c_i, A_i
    machine 4:  B_0 | beta_i, b_i, B_i | lambda2
"""

from __future__ import annotations

from collections import deque

from .reduction import SchedulingInstance, StripInstance, recognize, recover_values
from .schedule import Schedule, verify
from .strip import Packing, schedule_to_packing
from .threepartition import Partition, validate_partition


class InvalidWitness(ValueError):
    pass


def _check_witness(inst: SchedulingInstance, witness: Partition) -> None:
    values = recover_values(inst)
    D = inst.D
    for triple in witness:
        if len(triple) == 3 and all(1 <= i <= 3 * inst.z for i in triple):
            total = sum(values.values[i - 1] for i in triple)
            if total != D:
                raise InvalidWitness(
                    f"triple {tuple(triple)} sums to {total}, expected {D}"
                )
    problems = validate_partition(values, witness)
    if problems:
        raise InvalidWitness(problems[0])


def build_schedule(inst: SchedulingInstance, witness: Partition) -> Schedule:
    """The canonical schedule realizing the witness.  Always feasible, with
    makespan exactly the target load and zero idle time."""
    if recognize(inst) is None:
        raise ValueError("build_schedule needs an unmodified reduction instance")
    _check_witness(inst, witness)

    z = inst.z
    values = recover_values(inst).values

    def block_p(i: int) -> list[str]:
        triple = sorted(witness[i - 1], key=lambda idx: (values[idx - 1], idx))
        return [f"P_{idx}" for idx in triple]

    seq: dict[int, deque[str]] = {
        1: deque(["lambda1", "A_0"]),
        2: deque(["B_0", "c_0", "A_0"]),
        3: deque(["B_0", "c_0", "A_0"]),
        4: deque(["B_0"]),
    }
    for i in range(1, z + 1):
        seq[1] += [f"a_{i}", f"alpha_{i}", f"A_{i}"]
        seq[2] += [f"a_{i}", f"gamma_{i}", *block_p(i), f"B_{i}", f"c_{i}", f"A_{i}"]
        seq[3] += [f"delta_{i}", f"b_{i}", f"B_{i}", f"c_{i}", f"A_{i}"]
        seq[4] += [f"beta_{i}", f"b_{i}", f"B_{i}"]
    seq[4].append("lambda2")

    homes: dict[str, frozenset[int]] = {}
    for m, queue in seq.items():
        for job_id in queue:
            homes[job_id] = homes.get(job_id, frozenset()) | {m}
    for job in inst.jobs:
        assert len(homes[job.id]) == job.q, job.id

    clock = {m: 0 for m in seq}
    starts: dict[str, int] = {}
    remaining = sum(len(q) for q in seq.values())
    while remaining:
        placed = 0
        for m in seq:
            if not seq[m]:
                continue
            job_id = seq[m][0]
            mine = homes[job_id]
            if any(not seq[o] or seq[o][0] != job_id for o in mine):
                continue
            ticks = {clock[o] for o in mine}
            assert len(ticks) == 1, f"machines disagree at {job_id}: {ticks}"
            t = ticks.pop()
            starts[job_id] = t
            for o in mine:
                seq[o].popleft()
                clock[o] += inst.by_id[job_id].p
            placed += len(mine)
        assert placed, "no placeable job; sequences are inconsistent"
        remaining -= placed

    assert len(set(clock.values())) == 1 and clock[1] == inst.W
    sched = Schedule(starts=starts, machines=homes)
    report = verify(inst, sched)
    assert report.feasible and report.makespan == inst.W and report.idle == 0
    return sched


def build_packing(strip: StripInstance, witness: Partition) -> Packing:
    """Height-4 packing realizing the witness (schedule laid sideways)."""
    inst = strip.to_scheduling()
    return schedule_to_packing(inst, build_schedule(inst, witness))
