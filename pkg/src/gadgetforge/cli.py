"""Command line front door.

Every subcommand prints exactly one machine-readable JSON payload on stdout
(canonical form: sorted keys, no spaces, big integers as decimal strings)
and keeps human commentary on stderr, so output can be piped safely.

Exit codes:
    0   positive result (feasible, audit clean, witness found, partition out)
    1   negative decision (infeasible, violations, proved-none, refutation)
    2   invalid input (usage, malformed JSON, parameter violations, refusals)
    3   budget exhausted before a decision
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .extraction import NotTargetMakespan, RefutationCertificate, extract_partition
from .reduction import (
    ParamViolation,
    SchedulingInstance,
    StripInstance,
    build_jobs,
    build_strip,
    recover_values,
)
from .render import render_packing_svg, render_schedule_svg
from .schedule import MachineOutOfRange, Schedule, UnknownJob, audit, verify
from .solver import DEFAULT_BUDGET, decide_target
from .strip import Packing
from .synthesis import InvalidWitness, build_schedule
from .threepartition import (
    GenerationFailed,
    SearchBudgetExceeded,
    ThreePartitionInstance,
    gen_no,
    gen_yes,
    partition_from_json,
    partition_to_json,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_BAD_INPUT = 2
EXIT_BUDGET = 3

_DECISION_EXITS = {
    "witness": EXIT_OK,
    "proved-none": EXIT_NEGATIVE,
    "refused": EXIT_BAD_INPUT,
    "budget-exceeded": EXIT_BUDGET,
}


def _emit(payload) -> None:
    if not isinstance(payload, str):
        payload = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    click.echo(payload)


def _log(message: str) -> None:
    click.echo(message, err=True)


def _fail(code: int, message: str) -> None:
    _log(message)
    sys.exit(code)


def _guard(fn):
    """Map library exceptions onto the exit-code table."""

    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (SearchBudgetExceeded, GenerationFailed) as exc:
            _fail(EXIT_BUDGET, f"budget: {exc}")
        except NotTargetMakespan as exc:
            _fail(EXIT_NEGATIVE, f"rejected: {exc}")
        except (UnknownJob, MachineOutOfRange) as exc:
            _fail(EXIT_BAD_INPUT, f"invalid input: {exc}")
        except (ParamViolation, InvalidWitness) as exc:
            _fail(EXIT_BAD_INPUT, f"invalid input: {exc}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            _fail(EXIT_BAD_INPUT, f"invalid input: {exc}")

    return wrapped


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


_in_file = click.Path(exists=True, dir_okay=False)


@click.group()
def main():
    """Rigid-job scheduling gadget toolkit.

    Generate number-partition instances, reduce them to 4-machine
    multiprocessor schedules or strip packings, synthesize and check
    canonical zero-idle schedules, pull partitions back out, run the
    exact decider, and draw figures.
    """


@main.command("gen3p")
@click.option("--yes/--no", "want_yes", default=None,
              help="Generate a solvable instance (with witness) or a certified unsolvable one.")
@click.option("--z", type=int, required=True, help="Number of partition sets.")
@click.option("--seed", type=int, required=True)
@click.option("--witness-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the witness JSON to this file (solvable only).")
@_guard
def gen3p(want_yes: bool, z: int, seed: int, witness_out: str | None):
    """Generate a 3-partition instance."""
    if want_yes is None:
        raise click.UsageError("give --yes or --no")
    if want_yes:
        inst, witness = gen_yes(z, seed)
        payload = {
            "instance": json.loads(inst.to_json()),
            "witness": [list(s) for s in witness],
        }
        if witness_out:
            Path(witness_out).write_text(partition_to_json(witness), encoding="utf-8")
            _log(f"witness written to {witness_out}")
    else:
        if witness_out:
            raise click.UsageError("--witness-out needs --yes")
        inst = gen_no(z, seed)
        payload = {"instance": json.loads(inst.to_json()), "witness": None}
        _log(f"unsolvable instance certified by exhaustive search (z={z})")
    _emit(payload)


@main.command("reduce")
@click.option("--in", "in_path", type=_in_file, required=True,
              help="3-partition instance JSON.")
@click.option("--strip", is_flag=True, help="Emit the strip-packing form instead.")
@_guard
def reduce_cmd(in_path: str, strip: bool):
    """Reduce a 3-partition instance to a scheduling (or strip) instance."""
    inst3 = ThreePartitionInstance.from_json(_read(in_path))
    built = build_strip(inst3) if strip else build_jobs(inst3)
    _emit(built.to_json())
    _log(f"reduced z={inst3.z}: {len(built.items if strip else built.jobs)} pieces, width {built.width if strip else built.W}")


@main.command("synth")
@click.option("--inst", "inst_path", type=_in_file, required=True,
              help="Scheduling instance JSON (a reduction).")
@click.option("--witness", "witness_path", type=_in_file, required=True,
              help="Partition witness JSON.")
@_guard
def synth(inst_path: str, witness_path: str):
    """Build the canonical zero-idle schedule realizing a witness."""
    inst = SchedulingInstance.from_json(_read(inst_path))
    witness = partition_from_json(_read(witness_path))
    sched = build_schedule(inst, witness)
    _emit(sched.to_json())
    _log(f"canonical schedule for z={inst.z}, makespan {inst.W}")


@main.command("verify")
@click.option("--inst", "inst_path", type=_in_file, required=True)
@click.option("--sched", "sched_path", type=_in_file, required=True)
@_guard
def verify_cmd(inst_path: str, sched_path: str):
    """Check feasibility, makespan, idle time, and contiguity."""
    inst = SchedulingInstance.from_json(_read(inst_path))
    sched = Schedule.from_json(_read(sched_path))
    report = verify(inst, sched)
    _emit(report.to_dict())
    if not report.feasible:
        _fail(EXIT_NEGATIVE, f"infeasible: {report.problems[0]}")
    _log(f"feasible, makespan {report.makespan}, idle {report.idle}")


@main.command("audit")
@click.option("--inst", "inst_path", type=_in_file, required=True)
@click.option("--sched", "sched_path", type=_in_file, required=True)
@_guard
def audit_cmd(inst_path: str, sched_path: str):
    """Check the start-time and precedence-count identities of a reduction
    schedule at the target makespan."""
    inst = SchedulingInstance.from_json(_read(inst_path))
    sched = Schedule.from_json(_read(sched_path))
    report = audit(inst, sched)
    _emit(report.to_dict())
    if not report.passed:
        first = report.first_violation
        _fail(EXIT_NEGATIVE, f"audit violation at {first.checkpoint}: {first.kind}")
    _log(f"audit clean: {len(report.checks)} checks")


@main.command("extract")
@click.option("--inst", "inst_path", type=_in_file, required=True)
@click.option("--sched", "sched_path", type=_in_file, required=True)
@click.option("--trace", is_flag=True, help="Log normalization stages to stderr.")
@_guard
def extract(inst_path: str, sched_path: str, trace: bool):
    """Normalize a target-makespan schedule and read the partition out."""
    inst = SchedulingInstance.from_json(_read(inst_path))
    sched = Schedule.from_json(_read(sched_path))
    inst3 = recover_values(inst)
    try:
        partition, tr = extract_partition(inst3, inst, sched)
    except RefutationCertificate as cert:
        _emit(cert.to_dict())
        _fail(EXIT_NEGATIVE, f"refuted at stage {cert.stage}: {cert.lemma}")
    if trace:
        for event in tr.events:
            _log("  ".join(f"{k}={v}" for k, v in sorted(event.items())))
    _emit(partition_to_json(partition))
    _log(f"partition of {3 * inst.z} values into {inst.z} sets")


@main.command("decide")
@click.option("--inst", "inst_path", type=_in_file, required=True)
@click.option("--target", type=str, default=None,
              help="Explicit target makespan (decimal string).")
@click.option("--target-w", "--target-W", "use_w", is_flag=True,
              help="Use the instance's designed target load W.")
@click.option("--contiguous", is_flag=True,
              help="Require machine sets to be intervals (strip-packing mode).")
@click.option("--budget", type=int, default=DEFAULT_BUDGET, show_default=True,
              help="Node budget per root branch.")
@click.option("--threads", type=int, default=None,
              help="Worker threads (default: GADGETFORGE_THREADS or 1).")
@_guard
def decide(inst_path: str, target: str | None, use_w: bool, contiguous: bool,
           budget: int, threads: int | None):
    """Exact zero-idle search: witness, proved-none, or an honest refusal."""
    if (target is None) == (not use_w):
        raise click.UsageError("give exactly one of --target or --target-w")
    inst = SchedulingInstance.from_json(_read(inst_path))
    goal = inst.W if use_w else int(target)
    decision = decide_target(
        inst, goal, contiguous, budget=budget, threads=threads
    )
    _emit(decision.to_dict())
    _log(f"{decision.outcome} after {decision.nodes} nodes")
    sys.exit(_DECISION_EXITS[decision.outcome])


@main.command("render")
@click.option("--inst", "inst_path", type=_in_file, default=None,
              help="Scheduling instance JSON (with --sched).")
@click.option("--sched", "sched_path", type=_in_file, default=None,
              help="Schedule JSON: draw a Gantt chart.")
@click.option("--strip", "strip_path", type=_in_file, default=None,
              help="Strip instance JSON (with --packing).")
@click.option("--packing", "packing_path", type=_in_file, default=None,
              help="Packing JSON: draw the strip figure.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_guard
def render(inst_path, sched_path, strip_path, packing_path, out_path):
    """Draw an SVG figure with a banded (per-magnitude) time axis."""
    if inst_path and sched_path and not (strip_path or packing_path):
        inst = SchedulingInstance.from_json(_read(inst_path))
        sched = Schedule.from_json(_read(sched_path))
        text = render_schedule_svg(inst, sched, path=out_path)
    elif strip_path and packing_path and not (inst_path or sched_path):
        strip = StripInstance.from_json(_read(strip_path))
        packing = Packing.from_json(_read(packing_path))
        text = render_packing_svg(strip, packing, path=out_path)
    else:
        raise click.UsageError(
            "give --inst with --sched (Gantt) or --strip with --packing (strip figure)"
        )
    _emit({"out": out_path, "bytes": len(text.encode())})
    _log(f"wrote {out_path}")


@main.command("roundtrip")
@click.option("--z", type=int, required=True)
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_guard
def roundtrip(z: int, trials: int, seed: int):
    """Generate, reduce, synthesize, verify, audit, extract, compare."""
    passes = 0
    failures = []
    for k in range(trials):
        inst3, planted = gen_yes(z, seed + k)
        inst = build_jobs(inst3)
        sched = build_schedule(inst, planted)
        report = verify(inst, sched)
        ok = (
            report.feasible
            and report.makespan == inst.W
            and report.idle == 0
            and report.contiguous
            and audit(inst, sched).passed
        )
        recovered, _ = extract_partition(inst3, inst, sched)
        ok = ok and {frozenset(s) for s in recovered} == {
            frozenset(s) for s in planted
        }
        if ok:
            passes += 1
            _log(f"trial {k}: pass (seed {seed + k})")
        else:
            failures.append(k)
            _log(f"trial {k}: FAIL (seed {seed + k})")
    _emit({"z": z, "trials": trials, "passes": passes, "failures": failures})
    if passes != trials:
        sys.exit(EXIT_NEGATIVE)


if __name__ == "__main__":
    main()
