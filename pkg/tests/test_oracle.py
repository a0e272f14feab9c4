import numpy as np
import pytest

from ibrdiff.ibr import ConverterPolicy, default_policies
from ibrdiff.network import TERMINALS, FaultSpec, TestSystemConfig, build_sequence_networks
from ibrdiff.oracle import brute_force_phase_solve
from ibrdiff.scenarios import enumerate_scenarios

CFG = TestSystemConfig()


def worst_gap(a, b):
    return max(
        np.max(np.abs(a.p1.as_array() - b.p1.as_array())),
        np.max(np.abs(a.p2.as_array() - b.p2.as_array())),
        np.max(np.abs(a.fault_current_abc.as_array() - b.fault_current_abc.as_array())),
    )


@pytest.mark.parametrize("cfg", [CFG, CFG.with_transformer_grounding(False)], ids=["grounded", "ungrounded"])
def test_sequence_solver_matches_phase_domain(cfg):
    worst = 0.0
    for sc in enumerate_scenarios():
        pol = default_policies(sc.control)
        sol = build_sequence_networks(cfg, sc.fault, pol).solve()
        ref = brute_force_phase_solve(cfg, sc.fault, pol)
        worst = max(worst, worst_gap(sol, ref))
    assert worst < 1e-9


@pytest.mark.parametrize("ft", ["AG", "AB", "ABG", "ABC"])
@pytest.mark.parametrize("loc", ["F1", "F3", "F5", "F6"])
def test_with_current_sources(ft, loc):
    pol = default_policies("C2")
    f = FaultSpec(ft, loc, 2.5, 10.0)
    src = {"wind_c2": 0.3 - 1.0j, "ommc": -0.2 - 1.5j}
    sol = build_sequence_networks(CFG, f, pol).solve(src)
    ref = brute_force_phase_solve(CFG, f, pol, src)
    assert worst_gap(sol, ref) < 1e-9


def test_residual_admittance_and_c2_clusters():
    wind = ConverterPolicy("grid-following", neg_seq_mode="C1", residual_neg_admittance=0.05)
    pol = {"wind_c1": wind, "wind_c2": wind, "ommc": ConverterPolicy("grid-forming", neg_seq_mode="C2")}
    for ft in ("AG", "ABG"):
        f = FaultSpec(ft, 0.3, 5.0, 25.0)
        sol = build_sequence_networks(CFG, f, pol).solve()
        assert worst_gap(sol, brute_force_phase_solve(CFG, f, pol)) < 1e-9


def test_balanced_fault_sequence_currents():
    ref = brute_force_phase_solve(CFG, FaultSpec("ABC", "F4", 5.0), default_policies("C2"))
    seq = ref.fault_current
    assert abs(seq.zero) < 1e-9 and abs(seq.negative) < 1e-9
    assert abs(seq.positive) > 1


def test_through_current_balances_for_external_faults():
    for loc in ("F6", "F7"):
        ref = brute_force_phase_solve(CFG, FaultSpec("ABG", loc), default_policies("C2"))
        assert np.max(np.abs(ref.p1.as_array() + ref.p2.as_array())) < 1e-9
        assert ref.i_fault_magnitude > 1


def test_terminal_set_is_fixed():
    assert TERMINALS == ("wind_c1", "wind_c2", "ommc")
