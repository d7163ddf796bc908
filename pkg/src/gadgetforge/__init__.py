"""gadgetforge: exact 3-Partition gadget reductions, verifiers, and deciders.

The package turns a hardness construction into runnable artifacts: generate
number-partition instances, expand them into rigid-job schedules on four
machines (or strip packings of width W), synthesize and check the canonical
zero-idle schedule for a witness, pull the witness back out of any feasible
target-makespan schedule, and decide small instances exactly.
"""

from .exactnum import CoeffVector, compose, decompose, digit_bound
from .extraction import (
    ExtractionTrace,
    RefutationCertificate,
    extract_partition,
    normalize_machines,
)
from .reduction import (
    Job,
    ParamViolation,
    SchedulingInstance,
    StripInstance,
    build_jobs,
    build_strip,
    forced_starts,
    recognize,
    recover_values,
)
from .render import render_packing_svg, render_schedule_svg
from .schedule import Schedule, VerifyReport, audit, mirror, swap_after, verify
from .solver import Decision, PruneRules, decide_target, optimize_small
from .strip import (
    Packing,
    normalize,
    packing_to_schedule,
    schedule_to_packing,
    verify_packing,
)
from .synthesis import build_packing, build_schedule
from .threepartition import (
    Partition,
    ThreePartitionInstance,
    gen_no,
    gen_yes,
    solve,
    validate_partition,
)

__version__ = "0.1.0"

__all__ = [
    "CoeffVector",
    "compose",
    "decompose",
    "digit_bound",
    "ExtractionTrace",
    "RefutationCertificate",
    "extract_partition",
    "normalize_machines",
    "Job",
    "ParamViolation",
    "SchedulingInstance",
    "StripInstance",
    "build_jobs",
    "build_strip",
    "forced_starts",
    "recognize",
    "recover_values",
    "render_packing_svg",
    "render_schedule_svg",
    "Schedule",
    "VerifyReport",
    "audit",
    "mirror",
    "swap_after",
    "verify",
    "Decision",
    "PruneRules",
    "decide_target",
    "optimize_small",
    "Packing",
    "normalize",
    "packing_to_schedule",
    "schedule_to_packing",
    "verify_packing",
    "build_packing",
    "build_schedule",
    "Partition",
    "ThreePartitionInstance",
    "gen_no",
    "gen_yes",
    "solve",
    "validate_partition",
    "__version__",
]
