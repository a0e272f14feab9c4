"""The fault study matrix: enumeration, execution and qualitative checks."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .ibr import (
    CURRENT_LIMITED,
    ConverterPolicy,
    LimitedSolution,
    NegSeqMode,
    Role,
    apply_policies,
)
from .network import (
    EXTERNAL_LOCATIONS,
    INTERNAL_LOCATIONS,
    TERMINALS,
    FaultSpec,
    FaultType,
    TestSystemConfig,
    build_sequence_networks,
)
from .relays import ELEMENTS, RelaySettings, TripDecision, evaluate_all

LOCATIONS = tuple(INTERNAL_LOCATIONS) + tuple(EXTERNAL_LOCATIONS)
FAULT_TYPES = tuple(FaultType)
LEVELS = ("R1", "R2", "R3", "R4")
CONTROLS = ("C1", "C2")

# (r_phase, r_ground) in ohm for each level
RESISTANCE_TABLE = {
    FaultType.AG: ((0.0, 0.0), (0.0, 10.0), (0.0, 25.0), (0.0, 50.0)),
    FaultType.AB: ((0.0, 0.0), (2.5, 0.0), (5.0, 0.0), (10.0, 0.0)),
    FaultType.ABG: ((0.0, 0.0), (2.5, 10.0), (5.0, 25.0), (10.0, 50.0)),
    FaultType.ABC: ((0.0, 0.0), (2.5, 0.0), (5.0, 0.0), (10.0, 0.0)),
}


@dataclass(frozen=True)
class ScenarioMatrix:
    locations: tuple = LOCATIONS
    fault_types: tuple = FAULT_TYPES
    levels: tuple = LEVELS
    controls: tuple = CONTROLS

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(str(x).upper() for x in self.locations))
        object.__setattr__(self, "fault_types", tuple(FaultType(x) for x in self.fault_types))
        object.__setattr__(self, "levels", tuple(str(x).upper() for x in self.levels))
        object.__setattr__(self, "controls", tuple(str(x).upper() for x in self.controls))
        for loc in self.locations:
            if loc not in LOCATIONS:
                raise ValueError(f"unknown location {loc!r}")
        for lv in self.levels:
            if lv not in LEVELS:
                raise ValueError(f"unknown resistance level {lv!r}")
        for c in self.controls:
            if c not in CONTROLS:
                raise ValueError(f"unknown control {c!r}")


@dataclass(frozen=True)
class Scenario:
    location: str
    fault_type: FaultType
    level: str
    control: str

    @property
    def id(self) -> str:
        return f"{self.location}-{self.fault_type.value}-{self.level}-{self.control}"

    @property
    def fault(self) -> FaultSpec:
        r_phase, r_ground = RESISTANCE_TABLE[self.fault_type][LEVELS.index(self.level)]
        return FaultSpec(self.fault_type, self.location, r_phase, r_ground)

    @property
    def internal(self) -> bool:
        return self.location in INTERNAL_LOCATIONS


def enumerate_scenarios(matrix: ScenarioMatrix = ScenarioMatrix()) -> list:
    """Cartesian product ordered by location, type, resistance, control."""
    # keep the canonical order whatever order the caller listed things in
    locs = [x for x in LOCATIONS if x in matrix.locations]
    types = [x for x in FAULT_TYPES if x in matrix.fault_types]
    levels = [x for x in LEVELS if x in matrix.levels]
    controls = [x for x in CONTROLS if x in matrix.controls]
    return [Scenario(*combo) for combo in itertools.product(locs, types, levels, controls)]


@dataclass(frozen=True)
class StudyConfig:
    """Everything a study run needs besides the scenario list.

    ``ommc_policy.neg_seq_mode`` is replaced by each scenario's control
    unless ``ommc_mode_override`` pins it.
    """

    system: TestSystemConfig = field(default_factory=TestSystemConfig)
    relay: RelaySettings = field(default_factory=RelaySettings)
    wind_policy: ConverterPolicy = field(default_factory=lambda: ConverterPolicy(Role.GRID_FOLLOWING))
    ommc_policy: ConverterPolicy = field(default_factory=lambda: ConverterPolicy(Role.GRID_FORMING))
    ommc_mode_override: str | None = None
    matrix: ScenarioMatrix = field(default_factory=ScenarioMatrix)

    def __post_init__(self):
        if self.ommc_mode_override is not None:
            object.__setattr__(self, "ommc_mode_override", NegSeqMode(self.ommc_mode_override).short)

    def ommc_mode(self, control: str) -> str:
        return self.ommc_mode_override or control

    def policies(self, control: str) -> dict:
        ommc = replace(self.ommc_policy, neg_seq_mode=NegSeqMode(self.ommc_mode(control)))
        return {"wind_c1": self.wind_policy, "wind_c2": self.wind_policy, "ommc": ommc}


@dataclass(frozen=True)
class ScenarioResult:
    scenario_id: str
    fault: FaultSpec
    control: str
    decisions: dict  # element -> TripDecision
    solution: LimitedSolution
    scenario: Scenario | None = None

    @property
    def converged(self) -> bool:
        return self.solution.converged

    @property
    def internal(self) -> bool:
        return self.fault.internal

    def trips(self) -> list:
        return [e for e, d in self.decisions.items() if d.trip]


def run_scenario(config: TestSystemConfig, policies: dict, fault: FaultSpec,
                 settings: RelaySettings = RelaySettings(), scenario_id: str | None = None,
                 control: str = "") -> ScenarioResult:
    """Build, solve, limit and relay-evaluate one fault."""
    networks = build_sequence_networks(config, fault, policies)
    limited = apply_policies(networks.solve(), networks.policies, networks)
    decisions = evaluate_all(limited.p1, limited.p2, settings, (limited.p1_seq, limited.p2_seq))
    sid = scenario_id or f"{fault.label}-{fault.fault_type.value}"
    return ScenarioResult(sid, fault, control, decisions, limited)


def run_study_scenario(study: StudyConfig, scenario: Scenario) -> ScenarioResult:
    res = run_scenario(
        study.system,
        study.policies(scenario.control),
        scenario.fault,
        study.relay,
        scenario.id,
        scenario.control,
    )
    return replace(res, scenario=scenario)


def _run_packed(args):
    return run_study_scenario(*args)


def run_matrix(study: StudyConfig, scenarios=None, jobs: int = 1) -> list:
    """Run ``scenarios`` (default: the study matrix) in enumeration order."""
    if scenarios is None:
        scenarios = enumerate_scenarios(study.matrix)
    scenarios = list(scenarios)
    if jobs <= 1 or len(scenarios) < 2:
        return [run_study_scenario(study, s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(scenarios) // (4 * jobs))
        return list(pool.map(_run_packed, [(study, s) for s in scenarios], chunksize=chunk))


# --- findings ---------------------------------------------------------------

PASS, FAIL, NOT_EXERCISED = "pass", "fail", "not-exercised"


@dataclass(frozen=True)
class Finding:
    id: str
    description: str
    status: str
    violations: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class FindingsReport:
    findings: tuple

    @property
    def passed(self) -> bool:
        return all(f.status != FAIL for f in self.findings)

    def __getitem__(self, finding_id: str) -> Finding:
        for f in self.findings:
            if f.id == finding_id:
                return f
        raise KeyError(finding_id)

    def format(self) -> str:
        lines = []
        for f in self.findings:
            line = f"[{f.status.upper():>13}] {f.id}: {f.description}"
            if f.note:
                line += f" ({f.note})"
            lines.append(line)
            if f.violations:
                shown = ", ".join(f.violations[:20])
                more = len(f.violations) - 20
                lines.append(f"    violating: {shown}" + (f" ... (+{more})" if more > 0 else ""))
        n_fail = sum(f.status == FAIL for f in self.findings)
        lines.append(f"{len(self.findings) - n_fail}/{len(self.findings)} findings without failure")
        return "\n".join(lines)


def _select(results, fault_type=None, control=None, internal=None):
    out = []
    for r in results:
        if fault_type is not None and r.fault.fault_type is not fault_type:
            continue
        if control is not None and r.control != control:
            continue
        if internal is not None and r.internal != internal:
            continue
        out.append(r)
    return out


def _expect(results, elements, trip: bool) -> tuple:
    return tuple(
        r.scenario_id for r in results
        if any(r.decisions[e].trip != trip for e in elements)
    )


def _finding(fid, description, scope, violations, note="") -> Finding:
    if not scope:
        return Finding(fid, description, NOT_EXERCISED, (), note or "no matching scenarios")
    return Finding(fid, description, FAIL if violations else PASS, tuple(violations), note)


def _skip(fid, description, why) -> Finding:
    return Finding(fid, description, NOT_EXERCISED, (), why)


def _level(r) -> int:
    if r.scenario is not None:
        return LEVELS.index(r.scenario.level)
    table = RESISTANCE_TABLE[r.fault.fault_type]
    return table.index((r.fault.r_phase, r.fault.r_ground))


def check_findings(results, study: StudyConfig = StudyConfig()) -> FindingsReport:
    """Check results against the expected qualitative behaviour."""
    system = study.system
    zero_path = all(system.transformer(t).passes_zero_sequence for t in TERMINALS)
    any_zero_path = any(system.transformer(t).passes_zero_sequence for t in TERMINALS)
    wind_suppress = (
        study.wind_policy.neg_seq_mode is NegSeqMode.C1_SUPPRESS
        and study.wind_policy.residual_neg_admittance == 0
    )
    ommc_c1_exact = study.ommc_policy.residual_neg_admittance == 0

    def ommc_is(control, wanted):
        return study.ommc_mode(control) == wanted

    out = []
    ag_c1 = _select(results, FaultType.AG, "C1", True)
    ag_c2 = _select(results, FaultType.AG, "C2", True)
    ab_c1 = _select(results, FaultType.AB, "C1", True)
    ab_c2 = _select(results, FaultType.AB, "C2", True)
    abg_c1 = _select(results, FaultType.ABG, "C1", True)
    abg_c2 = _select(results, FaultType.ABG, "C2", True)
    abc = _select(results, FaultType.ABC, None, True)

    c1_ok = wind_suppress and ommc_c1_exact and ommc_is("C1", "C1")
    c2_ok = wind_suppress and ommc_is("C2", "C2")
    c1_why = "C1 scenarios do not run with full negative-sequence suppression"
    c2_why = "C2 scenarios do not run the OMMC in C2"

    desc = "PG faults under C1: no element trips and the fault current is null"
    if c1_ok:
        bad = [r.scenario_id for r in ag_c1 if r.trips() or r.solution.i_fault_magnitude >= 1e-12]
        out.append(_finding("pg_c1_blind", desc, ag_c1, bad))
    else:
        out.append(_skip("pg_c1_blind", desc, c1_why))

    desc = "PG faults under C2: 87L_a, 87Q and 87G trip"
    if c2_ok and zero_path:
        out.append(_finding("pg_c2_sensitive", desc, ag_c2, _expect(ag_c2, ("87L_a", "87Q", "87G"), True)))
    else:
        out.append(_skip("pg_c2_sensitive", desc, c2_why if not c2_ok else "zero-sequence path blocked"))

    desc = "PP faults under C1: no element trips"
    if c1_ok:
        out.append(_finding("pp_c1_blind", desc, ab_c1, [r.scenario_id for r in ab_c1 if r.trips()]))
    else:
        out.append(_skip("pp_c1_blind", desc, c1_why))

    desc = "PP faults under C2: 87L_a, 87L_b and 87Q trip"
    if c2_ok:
        out.append(_finding("pp_c2_sensitive", desc, ab_c2, _expect(ab_c2, ("87L_a", "87L_b", "87Q"), True)))
    else:
        out.append(_skip("pp_c2_sensitive", desc, c2_why))

    desc = "PP faults: no zero-sequence current and 87G never trips"
    ab_all = _select(results, FaultType.AB)
    bad = [
        r.scenario_id for r in ab_all
        if r.decisions["87G"].trip or r.solution.fault_current.zero != 0
    ]
    out.append(_finding("pp_no_87g", desc, ab_all, bad))

    if c1_ok and zero_path:
        desc = "PPG faults under C1: 87G trips at every resistance level"
        out.append(_finding("ppg_c1_87g", desc, abg_c1, _expect(abg_c1, ("87G",), True)))
        desc = "PPG faults under C1: 87Q never trips"
        out.append(_finding("ppg_c1_87q", desc, abg_c1, _expect(abg_c1, ("87Q",), False)))
        out.append(_ppg_crossover(abg_c1))
    else:
        why = c1_why if not c1_ok else "zero-sequence path blocked"
        out.append(_skip("ppg_c1_87g", "PPG faults under C1: 87G trips at every resistance level", why))
        out.append(_skip("ppg_c1_87q", "PPG faults under C1: 87Q never trips", why))
        out.append(_skip("ppg_c1_87l_crossover", "PPG faults under C1: 87L_a/b lose sensitivity with resistance", why))

    desc = "PPG faults under C2: 87L_a, 87L_b, 87Q and 87G trip"
    if c2_ok and zero_path:
        out.append(_finding("ppg_c2_all", desc, abg_c2, _expect(abg_c2, ("87L_a", "87L_b", "87Q", "87G"), True)))
    else:
        out.append(_skip("ppg_c2_all", desc, c2_why if not c2_ok else "zero-sequence path blocked"))

    desc = "PPP faults, both controls: all three 87L elements trip"
    out.append(_finding("ppp_all", desc, abc, _expect(abc, ("87L_a", "87L_b", "87L_c"), True)))

    desc = "External faults: no trips and every operating quantity below 1e-9 p.u."
    ext = _select(results, internal=False)
    bad = [
        r.scenario_id for r in ext
        if r.trips() or any(d.point.i_op >= 1e-9 for d in r.decisions.values())
    ]
    out.append(_finding("external_selective", desc, ext, bad))

    desc = "Converter positive-sequence current within its limit, all scenarios converged"
    limits = {"wind_c1": study.wind_policy.i_limit_pos, "wind_c2": study.wind_policy.i_limit_pos,
              "ommc": study.ommc_policy.i_limit_pos}
    bad = [
        r.scenario_id for r in results
        if not r.converged or any(r.solution.current_pu[t] > limits[t] + 1e-6 for t in TERMINALS)
    ]
    out.append(_finding("current_limit", desc, results, bad))

    desc = "Blocked zero-sequence path: PG faults carry no I0 and 87G sees nothing"
    if not any_zero_path:
        ag = _select(results, FaultType.AG)
        bad = [
            r.scenario_id for r in ag
            if r.solution.fault_current.zero != 0 or r.decisions["87G"].point.i_op != 0
        ]
        out.append(_finding("pg_grounding_dependence", desc, ag, bad,
                            "87G is blind to PG faults with these transformer connections"))
    else:
        out.append(_skip("pg_grounding_dependence", desc, "zero-sequence path present"))

    return FindingsReport(tuple(out))


def _ppg_crossover(abg_c1) -> Finding:
    """87L_a/b trip at low resistance and stop at high resistance.

    The boundary depends on impedances that are not published, so any
    monotone crossover after R1, R2 or R3 is accepted (R2 +/- one level).
    """
    fid = "ppg_c1_87l_crossover"
    desc = "PPG faults under C1: 87L_a/b trip at low resistance only"
    by_loc = {}
    for r in abg_c1:
        by_loc.setdefault(r.fault.location, {})[_level(r)] = r
    bad = []
    for loc, rows in by_loc.items():
        if sorted(rows) != [0, 1, 2, 3]:
            continue
        for e in ("87L_a", "87L_b"):
            pattern = [rows[i].decisions[e].trip for i in range(4)]
            k = sum(pattern)
            monotone = pattern == [True] * k + [False] * (4 - k)
            if not (monotone and 1 <= k <= 3):
                bad.extend(rows[i].scenario_id for i in range(4))
    bad = tuple(dict.fromkeys(bad))
    return _finding(fid, desc, by_loc, bad, "crossover accepted at R1/R2, R2/R3 or R3/R4")


def result_records(results) -> list:
    """Long-format rows, one per scenario and element."""
    rows = []
    for r in results:
        sc = r.scenario
        for e in ELEMENTS:
            d: TripDecision = r.decisions[e]
            rows.append({
                "scenario_id": r.scenario_id,
                "location": r.fault.label,
                "fault_type": r.fault.fault_type.value,
                "r_phase_ohm": r.fault.r_phase,
                "r_ground_ohm": r.fault.r_ground,
                "control": sc.control if sc else r.control,
                "element": e,
                "i_rst_pu": d.point.i_rst,
                "i_op_pu": d.point.i_op,
                "trip": d.trip,
                "converged": r.converged,
            })
    return rows


def limited_terminals(result: ScenarioResult) -> list:
    return [t for t, m in result.solution.modes.items() if m == CURRENT_LIMITED]
