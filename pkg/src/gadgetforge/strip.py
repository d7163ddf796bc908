"""Strip packings of the reduction items, and the bridge to schedules.

Items are axis-aligned rectangles (width = job length, height = machine
count) packed without rotation into a strip of fixed width.  A packing in
which every item sits at an integral y with total height 4 is exactly a
contiguous-machine schedule read sideways: machine k is the horizontal lane
[k-1, k).  `normalize` pushes any feasible packing down and left to a
fixpoint; coordinates become integral in the first sweep, so deciding
"height 4 or not" never needs real arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .reduction import SchedulingInstance, StripInstance
from .schedule import Schedule

Coord = int | Fraction


class MissingItem(KeyError):
    pass


class WidthExceeded(ValueError):
    pass


class NotContiguous(ValueError):
    pass


class NonIntegralY(ValueError):
    pass


class HeightExceeds4(ValueError):
    pass


@dataclass(frozen=True)
class Packing:
    positions: Mapping[str, tuple[Coord, Coord]]

    def to_json(self) -> str:
        payload: dict[str, list] = {}
        for item_id, (x, y) in self.positions.items():
            if y != int(y):
                raise NonIntegralY(
                    f"item {item_id} has y={y}; serialized packings need "
                    "integral y"
                )
            payload[item_id] = [str(x), int(y)]
        return json.dumps(
            {"positions": payload}, sort_keys=True, separators=(",", ":")
        )

    @classmethod
    def from_json(cls, text: str) -> "Packing":
        raw = json.loads(text)["positions"]
        positions = {}
        for item_id, (x, y) in raw.items():
            positions[item_id] = (_parse_coord(x), int(y))
        return cls(positions=positions)


def _parse_coord(token) -> Coord:
    if isinstance(token, int):
        return token
    text = str(token)
    if "/" in text:
        return Fraction(text)
    return int(text)


@dataclass(frozen=True)
class PackingReport:
    feasible: bool
    height: Coord
    free_area: Coord
    problems: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "height": str(self.height),
            "free_area": str(self.free_area),
            "problems": list(self.problems),
        }


def _check_item_universe(strip: StripInstance, packing: Packing) -> None:
    for item_id in packing.positions:
        if item_id not in strip.by_id:
            raise MissingItem(f"packing mentions unknown item {item_id!r}")
    for item in strip.items:
        if item.id not in packing.positions:
            raise MissingItem(f"item {item.id!r} is missing from the packing")


def verify_packing(strip: StripInstance, packing: Packing) -> PackingReport:
    """Exact overlap/bounds check.  MissingItem and WidthExceeded are hard
    errors; overlaps and negative coordinates are reported as problems."""
    _check_item_universe(strip, packing)
    problems: list[str] = []

    for item in strip.items:
        x, y = packing.positions[item.id]
        if x + item.w > strip.width:
            raise WidthExceeded(
                f"item {item.id} spans [{x}, {x + item.w}) in a strip of "
                f"width {strip.width}"
            )
        if x < 0:
            problems.append(f"item {item.id} has x={x} < 0")
        if y < 0:
            problems.append(f"item {item.id} has y={y} < 0")

    boxes = [
        (item, packing.positions[item.id]) for item in strip.items
    ]
    for i, (it1, (x1, y1)) in enumerate(boxes):
        for it2, (x2, y2) in boxes[i + 1 :]:
            if (
                x1 < x2 + it2.w
                and x2 < x1 + it1.w
                and y1 < y2 + it2.h
                and y2 < y1 + it1.h
            ):
                problems.append(f"items {it1.id} and {it2.id} overlap")

    height = max((y + it.h for it, (_, y) in boxes), default=0)
    free_area = strip.width * height - strip.total_area
    return PackingReport(
        feasible=not problems,
        height=height,
        free_area=free_area,
        problems=tuple(problems),
    )


def normalize(strip: StripInstance, packing: Packing) -> Packing:
    """Push every item down, then left, until nothing moves.

    Requires a feasible packing.  Items settle in deterministic (coordinate,
    id) order; each falls to the highest top of the already-settled items it
    overlaps horizontally (the floor otherwise), then slides against the
    rightmost edge of its vertical neighbors.  One down sweep makes all y
    integral and one left sweep all x, after which the coordinate sum is a
    strictly decreasing nonnegative integer, so the loop terminates.  The
    result never gets taller or feasibility-worse.
    """
    report = verify_packing(strip, packing)
    if not report.feasible:
        raise ValueError(f"cannot normalize infeasible packing: {report.problems}")

    pos = {k: (x, y) for k, (x, y) in packing.positions.items()}

    def sweep(axis: int) -> bool:
        # axis 0: slide left (pack x against right edges)
        # axis 1: drop down (pack y against tops)
        moved = False
        order = sorted(
            strip.items,
            key=lambda it: (pos[it.id][axis], pos[it.id][1 - axis], it.id),
        )
        settled: list = []
        for item in order:
            x, y = pos[item.id]
            if axis == 1:
                lo, hi, size = x, x + item.w, item.h
            else:
                lo, hi, size = y, y + item.h, item.w
            edge = 0
            for other, (olo, ohi, oedge) in settled:
                if olo < hi and lo < ohi and oedge <= (y if axis == 1 else x):
                    edge = max(edge, oedge)
            if axis == 1:
                if edge < y:
                    moved = True
                pos[item.id] = (x, edge)
                settled.append((item, (lo, hi, edge + size)))
            else:
                if edge < x:
                    moved = True
                pos[item.id] = (edge, y)
                settled.append((item, (lo, hi, edge + size)))
        return moved

    while True:
        dropped = sweep(1)
        slid = sweep(0)
        if not dropped and not slid:
            break

    pos = {
        k: (
            int(x) if x == int(x) else x,
            int(y) if y == int(y) else y,
        )
        for k, (x, y) in pos.items()
    }
    result = Packing(positions=pos)
    after = verify_packing(strip, result)
    assert after.feasible and after.height <= report.height
    return result


def schedule_to_packing(inst: SchedulingInstance, sched: Schedule) -> Packing:
    """Lay a contiguous-machine schedule sideways: x = start, y = lowest
    machine - 1.  NotContiguous if some job's machines are not an interval."""
    positions = {}
    for job in inst.jobs:
        machines = sched.machines[job.id]
        if max(machines) - min(machines) + 1 != len(machines):
            raise NotContiguous(
                f"job {job.id} occupies non-adjacent machines "
                f"{sorted(machines)}"
            )
        positions[job.id] = (sched.starts[job.id], min(machines) - 1)
    return Packing(positions=positions)


def packing_to_schedule(inst: SchedulingInstance, packing: Packing) -> Schedule:
    """Read a height-4 integral packing as a schedule: machines y+1 .. y+h."""
    starts = {}
    machines = {}
    for job in inst.jobs:
        if job.id not in packing.positions:
            raise MissingItem(f"item {job.id!r} is missing from the packing")
        x, y = packing.positions[job.id]
        if y != int(y):
            raise NonIntegralY(f"item {job.id} has y={y}")
        y = int(y)
        if y + job.q > inst.m:
            raise HeightExceeds4(
                f"item {job.id} reaches height {y + job.q} > {inst.m}"
            )
        starts[job.id] = x
        machines[job.id] = frozenset(range(y + 1, y + job.q + 1))
    return Schedule(starts=starts, machines=machines)
