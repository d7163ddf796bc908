"""Shared hand-built fixtures.

`canonical_z1` lays out the unique (up to relabeling) zero-idle schedule for
the z=1, D=33 instance (10, 11, 12) with every start written out from the
closed forms.  It is constructed here, independently of the synthesizer, so
the package's own builders can be checked against it.
"""

import pytest

from gadgetforge.reduction import build_jobs
from gadgetforge.schedule import Schedule
from gadgetforge.threepartition import ThreePartitionInstance

D = 33

P_A = D**2
P_B = D**3
P_SMALL_A = D**4 + D**6 + 3 * D**7
P_SMALL_B = D**5 + D**6 + 3 * D**7
P_C0 = D**7 + D**8
P_C1 = 2 * D**7 + D**8
P_ALPHA = D**3 + D**5 + 4 * D**7 + D**8
P_BETA = D**2 + D**4 + 3 * D**7 + D**8
P_GAMMA = D**5 + 2 * D**7 - D
P_DELTA = D**4 + 2 * D**7
P_L1 = D**3 + D**7 + D**8
P_L2 = D**2 + 2 * D**7 + D**8


def make_canonical_z1():
    inst3p = ThreePartitionInstance((10, 11, 12))
    sched_inst = build_jobs(inst3p)

    s = {}
    s["lambda1"] = 0
    s["B_0"] = 0
    s["beta_1"] = P_B
    s["b_1"] = s["beta_1"] + P_BETA
    s["c_0"] = P_B
    s["A_0"] = s["c_0"] + P_C0
    assert s["A_0"] == P_L1  # lambda1 ends exactly where A_0 begins
    s["a_1"] = s["A_0"] + P_A
    s["delta_1"] = s["A_0"] + P_A
    s["alpha_1"] = s["a_1"] + P_SMALL_A
    s["gamma_1"] = s["alpha_1"]
    s["P_1"] = s["gamma_1"] + P_GAMMA
    s["P_2"] = s["P_1"] + 10
    s["P_3"] = s["P_2"] + 11
    s["B_1"] = s["P_3"] + 12
    assert s["B_1"] == s["b_1"] + P_SMALL_B  # M4 and M2 agree on B_1
    assert s["B_1"] == s["delta_1"] + P_DELTA + P_SMALL_B
    s["c_1"] = s["B_1"] + P_B
    s["A_1"] = s["c_1"] + P_C1
    assert s["A_1"] == s["alpha_1"] + P_ALPHA
    s["lambda2"] = s["B_1"] + P_B
    W = s["A_1"] + P_A
    assert W == s["lambda2"] + P_L2
    assert W == sched_inst.W

    machines = {
        "lambda1": frozenset({1}),
        "A_0": frozenset({1, 2, 3}),
        "A_1": frozenset({1, 2, 3}),
        "a_1": frozenset({1, 2}),
        "alpha_1": frozenset({1}),
        "B_0": frozenset({2, 3, 4}),
        "B_1": frozenset({2, 3, 4}),
        "c_0": frozenset({2, 3}),
        "c_1": frozenset({2, 3}),
        "gamma_1": frozenset({2}),
        "P_1": frozenset({2}),
        "P_2": frozenset({2}),
        "P_3": frozenset({2}),
        "delta_1": frozenset({3}),
        "b_1": frozenset({3, 4}),
        "beta_1": frozenset({4}),
        "lambda2": frozenset({4}),
    }
    return inst3p, sched_inst, Schedule(starts=s, machines=machines)


@pytest.fixture
def canonical_z1():
    return make_canonical_z1()
