from dataclasses import replace

import pytest

from ibrdiff.ibr import NegSeqMode, default_policies
from ibrdiff.network import FaultSpec, FaultType, TestSystemConfig
from ibrdiff.relays import ELEMENTS, RelaySettings
from ibrdiff.scenarios import (
    FAIL,
    NOT_EXERCISED,
    PASS,
    Scenario,
    ScenarioMatrix,
    StudyConfig,
    check_findings,
    enumerate_scenarios,
    limited_terminals,
    result_records,
    run_matrix,
    run_scenario,
)


def test_matrix_counts():
    assert len(enumerate_scenarios()) == 224
    assert len(enumerate_scenarios(ScenarioMatrix(locations=("F3",), fault_types=("AG",)))) == 8
    assert enumerate_scenarios(ScenarioMatrix(locations=())) == []


def test_canonical_order_and_ids():
    sc = enumerate_scenarios(ScenarioMatrix(controls=("C2", "C1"), locations=("F7", "F1")))
    assert sc[0].id == "F1-AG-R1-C1"
    assert sc[1].id == "F1-AG-R1-C2"
    assert sc[-1].id == "F7-ABC-R4-C2"
    ids = [s.id for s in enumerate_scenarios()]
    assert len(set(ids)) == len(ids)


def test_resistance_levels():
    s = Scenario("F2", FaultType.ABG, "R3", "C1")
    f = s.fault
    assert (f.r_phase, f.r_ground) == (5.0, 25.0)
    assert f.distance == 0.25 and s.internal
    assert not Scenario("F6", FaultType.AB, "R1", "C1").internal


@pytest.mark.parametrize("kw", [{"locations": ("F9",)}, {"levels": ("R5",)}, {"controls": ("C3",)},
                                {"fault_types": ("BC",)}])
def test_matrix_validation(kw):
    with pytest.raises(ValueError):
        ScenarioMatrix(**kw)


def test_run_scenario_example():
    res = run_scenario(TestSystemConfig(), default_policies("C2"), FaultSpec("AG", "F3"))
    assert res.converged and res.internal
    assert {"87L_a", "87Q", "87G"} <= set(res.trips())
    assert list(res.decisions) == list(ELEMENTS)


def test_run_scenario_pg_c1_is_null():
    res = run_scenario(TestSystemConfig(), default_policies("C1"), FaultSpec("AG", "F3", 0, 10))
    assert res.solution.i_fault_magnitude == 0
    assert res.trips() == []


def test_policies_follow_control():
    study = StudyConfig()
    assert study.policies("C2")["ommc"].neg_seq_mode is NegSeqMode.C2_PRIORITIZE
    forced = StudyConfig(ommc_mode_override="C2")
    assert forced.policies("C1")["ommc"].neg_seq_mode is NegSeqMode.C2_PRIORITIZE


def test_default_findings_all_pass(default_results, default_study):
    report = check_findings(default_results, default_study)
    assert report.passed
    statuses = {f.id: f.status for f in report.findings}
    assert statuses.pop("pg_grounding_dependence") == NOT_EXERCISED
    assert set(statuses.values()) == {PASS}


def test_huge_pickup_breaks_sensitivity_findings(default_results):
    study = StudyConfig(relay=RelaySettings(0.5, 5.0))
    report = check_findings(run_matrix(study), study)
    assert not report.passed
    assert report["pg_c2_sensitive"].status == FAIL
    assert report["pg_c2_sensitive"].violations
    assert "violating" in report.format()


def test_forced_c2_skips_c1_findings():
    study = StudyConfig(ommc_mode_override="C2", matrix=ScenarioMatrix(fault_types=("AG", "AB")))
    report = check_findings(run_matrix(study), study)
    assert report["pg_c1_blind"].status == NOT_EXERCISED
    assert report["pp_c1_blind"].status == NOT_EXERCISED


def test_empty_scope_is_not_exercised():
    study = StudyConfig(matrix=ScenarioMatrix(fault_types=("ABC",)))
    report = check_findings(run_matrix(study), study)
    assert report["pg_c2_sensitive"].status == NOT_EXERCISED
    assert report["ppp_all"].status == PASS


def test_ungrounded_transformers_exercise_grounding_finding():
    study = StudyConfig(system=TestSystemConfig().with_transformer_grounding(False),
                        matrix=ScenarioMatrix(fault_types=("AG",)))
    report = check_findings(run_matrix(study), study)
    assert report["pg_grounding_dependence"].status == PASS
    assert report["pg_c2_sensitive"].status == NOT_EXERCISED


def test_records_long_format(default_results):
    rows = result_records(default_results)
    assert len(rows) == 224 * len(ELEMENTS)
    assert rows[0]["scenario_id"] == "F1-AG-R1-C1" and rows[0]["element"] == "87L_a"
    assert rows[4]["element"] == "87G"


def test_limited_terminals(default_results):
    abc = next(r for r in default_results if r.scenario_id == "F3-ABC-R1-C1")
    assert limited_terminals(abc) == ["wind_c1", "wind_c2", "ommc"]


def test_parallel_run_matches_serial():
    study = StudyConfig(matrix=ScenarioMatrix(locations=("F2", "F6")))
    a = run_matrix(study, jobs=1)
    b = run_matrix(study, jobs=3)
    assert [r.scenario_id for r in a] == [r.scenario_id for r in b]
    assert result_records(a) == result_records(b)
