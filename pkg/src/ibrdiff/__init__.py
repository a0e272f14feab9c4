"""Phasor-domain fault study of percentage differential protection (87L,
87Q, 87G) on a collector cable fed by inverter-based resources at both ends.
"""

from .ibr import ConverterPolicy, LimitedSolution, apply_policies, default_policies
from .network import (
    OPEN,
    FaultSpec,
    FaultType,
    NetworkSolution,
    SequenceImpedances,
    SingularNetworkError,
    TestSystemConfig,
    build_sequence_networks,
    solve_fault,
)
from .oracle import brute_force_phase_solve
from .phasor import PerUnitBase, SequenceSet, ThreePhaseSet, abc_to_seq, seq_to_abc, to_per_unit
from .relays import ELEMENTS, DifferentialPoint, RelaySettings, TripDecision, evaluate_all
from .scenarios import ScenarioMatrix, StudyConfig, check_findings, enumerate_scenarios, run_matrix

__version__ = "0.1.0"

__all__ = [
    "OPEN",
    "ELEMENTS",
    "ConverterPolicy",
    "DifferentialPoint",
    "FaultSpec",
    "FaultType",
    "LimitedSolution",
    "NetworkSolution",
    "PerUnitBase",
    "RelaySettings",
    "ScenarioMatrix",
    "SequenceImpedances",
    "SequenceSet",
    "SingularNetworkError",
    "StudyConfig",
    "TestSystemConfig",
    "ThreePhaseSet",
    "TripDecision",
    "abc_to_seq",
    "apply_policies",
    "brute_force_phase_solve",
    "build_sequence_networks",
    "check_findings",
    "default_policies",
    "enumerate_scenarios",
    "evaluate_all",
    "run_matrix",
    "seq_to_abc",
    "solve_fault",
    "to_per_unit",
]
