"""Sequence networks of the two-cluster collector system and fault solution.

Topology (positive, negative and zero sequence share it)::

    cluster 1 -- Tx-C1 -- A |P1| ==== cable 1 ==== |P2| B -- Tx-OMMC -- OMMC
                                                      |
                            cluster 2 -- Tx-C2 -- cable 2

The protected zone is cable 1 between the measurement points P1 (bus A) and
P2 (bus B). Internal faults sit at a fractional distance ``d`` from A.
External faults F6 and F7 sit on buses A and B just outside the zone.

All impedances in the solver are complex p.u. on the system base. A branch
that carries no current in some sequence is the ``OPEN`` sentinel rather than
a large impedance, so suppression is exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .phasor import (
    FORTESCUE,
    PerUnitBase,
    SequenceSet,
    ThreePhaseSet,
    abc_to_seq,
    seq_to_abc,
)


class SingularNetworkError(ValueError):
    """The fault interconnection has no unique solution."""


class _Open:
    """Marker for a branch that is an open circuit in one sequence."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OPEN"

    def __reduce__(self):
        # keep the singleton across pickling (process pools)
        return "OPEN"

    def __bool__(self):
        return False


OPEN = _Open()


def is_open(z) -> bool:
    return z is OPEN


def _check_impedance(name: str, z) -> None:
    if z is OPEN:
        return
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite or OPEN, got {z!r}")


@dataclass(frozen=True)
class SequenceImpedances:
    """Positive, negative and zero sequence impedance of one element."""

    z1: complex
    z2: complex
    z0: complex

    def __post_init__(self):
        for f in ("z1", "z2", "z0"):
            v = getattr(self, f)
            _check_impedance(f, v)
            if v is not OPEN:
                object.__setattr__(self, f, complex(v))

    @classmethod
    def uniform(cls, z: complex) -> SequenceImpedances:
        return cls(z, z, z)

    def by_sequence(self, seq: int):
        """Impedance for sequence 0, 1 or 2."""
        return (self.z0, self.z1, self.z2)[seq]


@dataclass(frozen=True)
class Cable:
    """Series impedance per km of a collector cable (ohm/km)."""

    z1_ohm_per_km: complex = complex(0.03, 0.12)
    z0_ohm_per_km: complex = complex(0.15, 0.35)

    def __post_init__(self):
        for f in ("z1_ohm_per_km", "z0_ohm_per_km"):
            v = complex(getattr(self, f))
            _check_impedance(f, v)
            if v == 0:
                raise ValueError(f"{f} must be nonzero")
            object.__setattr__(self, f, v)


@dataclass(frozen=True)
class Transformer:
    """Two-winding transformer; impedances in p.u. on the terminal rating."""

    z: SequenceImpedances
    hv_grounded: bool = True
    lv_grounded: bool = True

    @property
    def passes_zero_sequence(self) -> bool:
        # only a grounded-wye/grounded-wye unit couples zero sequence through
        return self.hv_grounded and self.lv_grounded

    def sequence_impedance(self, seq: int):
        if seq == 0 and not self.passes_zero_sequence:
            return OPEN
        return self.z.by_sequence(seq)


@dataclass(frozen=True)
class SourceEquivalent:
    """Converter equivalent behind its transformer, p.u. on its own rating."""

    z: SequenceImpedances


TERMINALS = ("wind_c1", "wind_c2", "ommc")
TERMINAL_NODE = {"wind_c1": "A", "wind_c2": "B", "ommc": "B"}


@dataclass(frozen=True)
class TestSystemConfig:
    """Parameters of the two-cluster collector system.

    Source and transformer impedances are on the rating of the terminal they
    belong to; the solver moves them to the system base.
    """

    __test__ = False  # not a pytest class

    s_base_mva: float = 450.0
    v_kv: float = 230.0
    cluster1_mva: float = 450.0
    cluster2_mva: float = 450.0
    ommc_mva: float = 900.0
    cable_length_km: float = 20.0
    cable: Cable = field(default_factory=Cable)
    tx_c1: Transformer = field(
        default_factory=lambda: Transformer(SequenceImpedances.uniform(0.06j))
    )
    tx_c2: Transformer = field(
        default_factory=lambda: Transformer(SequenceImpedances.uniform(0.06j))
    )
    tx_ommc: Transformer = field(
        default_factory=lambda: Transformer(SequenceImpedances.uniform(0.11j))
    )
    wind_c1: SourceEquivalent = field(
        default_factory=lambda: SourceEquivalent(SequenceImpedances(0.11j, 0.11j, 0.12j))
    )
    wind_c2: SourceEquivalent = field(
        default_factory=lambda: SourceEquivalent(SequenceImpedances(0.11j, 0.11j, 0.12j))
    )
    ommc: SourceEquivalent = field(
        default_factory=lambda: SourceEquivalent(SequenceImpedances(0.09j, 0.9j, 0.9j))
    )
    prefault_export_pu: float = 1.0
    ommc_voltage_pu: float = 1.0

    def __post_init__(self):
        for f in ("s_base_mva", "v_kv", "cluster1_mva", "cluster2_mva", "ommc_mva", "cable_length_km"):
            v = getattr(self, f)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{f} must be positive, got {v}")
        if not math.isfinite(self.prefault_export_pu) or self.prefault_export_pu < 0:
            raise ValueError("prefault_export_pu must be >= 0")
        if not (math.isfinite(self.ommc_voltage_pu) and self.ommc_voltage_pu > 0):
            raise ValueError("ommc_voltage_pu must be positive")

    @property
    def base(self) -> PerUnitBase:
        return PerUnitBase(self.s_base_mva, self.v_kv)

    def rating(self, terminal: str) -> float:
        return {
            "wind_c1": self.cluster1_mva,
            "wind_c2": self.cluster2_mva,
            "ommc": self.ommc_mva,
        }[terminal]

    def source(self, terminal: str) -> SourceEquivalent:
        return getattr(self, terminal)

    def transformer(self, terminal: str) -> Transformer:
        return {"wind_c1": self.tx_c1, "wind_c2": self.tx_c2, "ommc": self.tx_ommc}[terminal]

    def cable_impedance(self, seq: int) -> complex:
        """Whole-cable series impedance in system p.u."""
        per_km = self.cable.z0_ohm_per_km if seq == 0 else self.cable.z1_ohm_per_km
        return per_km * self.cable_length_km / self.base.z_base_ohm

    def with_transformer_grounding(self, grounded: bool) -> TestSystemConfig:
        """Copy with both windings of every transformer set to ``grounded``."""
        flags = dict(hv_grounded=grounded, lv_grounded=grounded)
        return replace(
            self,
            tx_c1=replace(self.tx_c1, **flags),
            tx_c2=replace(self.tx_c2, **flags),
            tx_ommc=replace(self.tx_ommc, **flags),
        )


class FaultType(str, enum.Enum):
    AG = "AG"
    AB = "AB"
    ABG = "ABG"
    ABC = "ABC"

    @property
    def grounded(self) -> bool:
        return self in (FaultType.AG, FaultType.ABG)

    def __str__(self):
        return self.value


INTERNAL_LOCATIONS = {"F1": 0.0, "F2": 0.25, "F3": 0.5, "F4": 0.75, "F5": 1.0}
EXTERNAL_LOCATIONS = {"F6": "A", "F7": "B"}


@dataclass(frozen=True)
class FaultSpec:
    """Fault type, location and resistances (ohm).

    ``location`` is a label F1..F7 or a fractional distance along cable 1
    measured from bus A.
    """

    fault_type: FaultType
    location: str | float
    r_phase: float = 0.0
    r_ground: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "fault_type", FaultType(self.fault_type))
        loc = self.location
        if isinstance(loc, str):
            loc = loc.upper()
            if loc not in INTERNAL_LOCATIONS and loc not in EXTERNAL_LOCATIONS:
                raise ValueError(f"unknown fault location {self.location!r}")
        else:
            loc = float(loc)
            if not (0.0 <= loc <= 1.0):
                raise ValueError(f"fault distance must lie in [0, 1], got {loc}")
        object.__setattr__(self, "location", loc)
        for f in ("r_phase", "r_ground"):
            v = float(getattr(self, f))
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{f} must be a finite value >= 0, got {v}")
            object.__setattr__(self, f, v)

    @property
    def internal(self) -> bool:
        return not (isinstance(self.location, str) and self.location in EXTERNAL_LOCATIONS)

    @property
    def distance(self) -> float | None:
        """Fraction of cable 1 between bus A and the fault; None if external."""
        if not self.internal:
            return None
        if isinstance(self.location, str):
            return INTERNAL_LOCATIONS[self.location]
        return self.location

    @property
    def external_bus(self) -> str | None:
        return None if self.internal else EXTERNAL_LOCATIONS[self.location]

    @property
    def label(self) -> str:
        if isinstance(self.location, str):
            return self.location
        return f"d={self.location:g}"


# Phase-domain fault constraints, rows over [Va, Vb, Vc, Ia, Ib, Ic] where I
# flows from the network into the fault.
def fault_constraints(fault_type: FaultType, r_phase: float, r_ground: float) -> np.ndarray:
    rph, rg = r_phase, r_ground
    rows = {
        FaultType.AG: [
            [0, 0, 0, 0, 1, 0],
            [0, 0, 0, 0, 0, 1],
            [1, 0, 0, -rg, 0, 0],
        ],
        FaultType.AB: [
            [0, 0, 0, 0, 0, 1],
            [0, 0, 0, 1, 1, 0],
            [1, -1, 0, -rph, 0, 0],
        ],
        FaultType.ABG: [
            [0, 0, 0, 0, 0, 1],
            [1, 0, 0, -(rph + rg), -rg, 0],
            [0, 1, 0, -rg, -(rph + rg), 0],
        ],
        FaultType.ABC: [
            [0, 0, 0, 1, 1, 1],
            [1, -1, 0, -rph, rph, 0],
            [0, 1, -1, 0, -rph, rph],
        ],
    }[FaultType(fault_type)]
    return np.array(rows, dtype=complex)


@dataclass(frozen=True)
class TerminalBranch:
    """A converter and its transformer (and cable 2 for cluster 2) as one
    shunt branch at a bus, in system p.u."""

    name: str
    node: str
    z_series: tuple  # per sequence 0, 1, 2; transformer (+ cable)
    z_source: tuple  # per sequence 0, 1, 2; converter equivalent
    emf: complex  # positive sequence internal voltage

    def z_total(self, seq: int):
        zs, zc = self.z_series[seq], self.z_source[seq]
        if zs is OPEN or zc is OPEN:
            return OPEN
        return zs + zc


@dataclass(frozen=True)
class PrefaultState:
    """Balanced pre-fault operating point (positive sequence)."""

    node_voltages: dict
    currents: dict  # terminal -> current into its bus
    terminal_voltages: dict
    emf: dict


def _terminal_series(config: TestSystemConfig, terminal: str) -> tuple:
    base = config.base
    rating = config.rating(terminal)
    tx = config.transformer(terminal)
    out = []
    for s in (0, 1, 2):
        z = tx.sequence_impedance(s)
        if z is not OPEN:
            z = base.rebase(z, rating)
            if terminal == "wind_c2":
                z = z + config.cable_impedance(s)
        out.append(z)
    return tuple(out)


def _terminal_source(config: TestSystemConfig, terminal: str, z2=None) -> tuple:
    base = config.base
    rating = config.rating(terminal)
    src = config.source(terminal).z
    out = []
    for s in (0, 1, 2):
        z = src.by_sequence(s) if (s != 2 or z2 is None) else z2
        out.append(OPEN if z is OPEN else base.rebase(z, rating))
    return tuple(out)


@lru_cache(maxsize=64)
def prefault_state(config: TestSystemConfig) -> PrefaultState:
    """Pre-fault load flow of the collector system.

    The OMMC holds its voltage setpoint at angle zero behind its positive
    sequence impedance. Each wind cluster exports ``prefault_export_pu`` of
    its rating as a current in phase with that reference.
    """
    base = config.base
    z1c = config.cable_impedance(1)
    y = 1 / z1c
    Y = np.array([[y, -y], [-y, y]], dtype=complex)
    J = np.zeros(2, dtype=complex)
    idx = {"A": 0, "B": 1}
    series = {t: _terminal_series(config, t) for t in TERMINALS}
    source = {t: _terminal_source(config, t) for t in TERMINALS}
    inject = {}
    for t in ("wind_c1", "wind_c2"):
        inject[t] = complex(config.prefault_export_pu * config.rating(t) / base.s_base_mva)
        J[idx[TERMINAL_NODE[t]]] += inject[t]
    z_ommc = series["ommc"][1] + source["ommc"][1]
    if z_ommc == 0:
        raise SingularNetworkError("OMMC positive-sequence path has zero impedance")
    k = idx["B"]
    Y[k, k] += 1 / z_ommc
    J[k] += config.ommc_voltage_pu / z_ommc
    try:
        V = np.linalg.solve(Y, J)
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError(str(exc)) from exc
    node_v = {n: complex(V[i]) for n, i in idx.items()}
    currents = dict(inject)
    currents["ommc"] = complex((config.ommc_voltage_pu - V[k]) / z_ommc)
    vt, emf = {}, {}
    for t in TERMINALS:
        v = node_v[TERMINAL_NODE[t]]
        vt[t] = v + currents[t] * series[t][1]
        emf[t] = v + currents[t] * (series[t][1] + source[t][1])
    emf["ommc"] = complex(config.ommc_voltage_pu)
    return PrefaultState(node_v, currents, vt, emf)


@dataclass(frozen=True)
class NetworkSolution:
    """Steady-state fault solution.

    Currents at P1 and P2 are measured into the protected cable. Fault
    current flows from the network into the fault.
    """

    fault: FaultSpec
    fault_current: SequenceSet
    fault_voltage: SequenceSet
    p1: ThreePhaseSet
    p2: ThreePhaseSet
    branch_currents: dict  # terminal -> SequenceSet into its bus
    terminal_voltages: dict  # terminal -> positive sequence at converter terminal
    node_voltages: dict  # node -> SequenceSet
    current_sources: dict = field(default_factory=dict)
    p1_seq: SequenceSet | None = None
    p2_seq: SequenceSet | None = None

    def __post_init__(self):
        # sequence terminal currents are kept as solved so that exact zeros
        # (open sequence paths) survive instead of picking up round-off
        if self.p1_seq is None:
            object.__setattr__(self, "p1_seq", abc_to_seq(self.p1))
        if self.p2_seq is None:
            object.__setattr__(self, "p2_seq", abc_to_seq(self.p2))

    @property
    def fault_current_abc(self) -> ThreePhaseSet:
        return seq_to_abc(self.fault_current)

    @property
    def i_fault_magnitude(self) -> float:
        return max(abs(x) for x in self.fault_current_abc)

    def positive_current(self, terminal: str) -> complex:
        return self.branch_currents[terminal].positive


@dataclass
class SequenceNetworks:
    """The three sequence networks for one fault location and policy set.

    ``nodes`` are the buses A and B plus an interior fault node F when the
    fault is strictly inside cable 1.
    """

    config: TestSystemConfig
    fault: FaultSpec
    policies: dict
    nodes: tuple
    fault_node: str
    cable_sections: tuple  # (node_i, node_j, (z0, z1, z2))
    branches: dict  # terminal -> TerminalBranch
    prefault: PrefaultState

    @property
    def base(self) -> PerUnitBase:
        return self.config.base

    @property
    def _idx(self) -> dict:
        return {n: i for i, n in enumerate(self.nodes)}

    def closed_branches(self, seq: int, current_sources=None) -> list:
        """Terminals whose branch is a closed shunt path in ``seq``."""
        current_sources = current_sources or {}
        out = []
        for name, br in self.branches.items():
            if seq == 1 and name in current_sources:
                continue
            if br.z_total(seq) is not OPEN:
                out.append(name)
        return out

    def is_open(self, seq: int, current_sources=None) -> bool:
        """True when ``seq`` has no closed path to the reference bus."""
        return not self.closed_branches(seq, current_sources)

    def cable_split(self, seq: int) -> tuple:
        """Cable-1 impedance on the A side and B side of the fault point."""
        zc = self.config.cable_impedance(seq)
        d = self.fault.distance
        if d is None:
            d = 0.0 if self.fault.external_bus == "A" else 1.0
        return d * zc, (1 - d) * zc

    def matrices(self, seq: int, current_sources=None):
        """Nodal admittance matrix and injection vector of one sequence."""
        current_sources = current_sources or {}
        idx = self._idx
        n = len(self.nodes)
        Y = np.zeros((n, n), dtype=complex)
        J = np.zeros(n, dtype=complex)
        for i, j, z in self.cable_sections:
            y = 1 / z[seq]
            a, b = idx[i], idx[j]
            Y[a, a] += y
            Y[b, b] += y
            Y[a, b] -= y
            Y[b, a] -= y
        for name, br in self.branches.items():
            k = idx[br.node]
            if seq == 1 and name in current_sources:
                J[k] += current_sources[name]
                continue
            z = br.z_total(seq)
            if z is OPEN:
                continue
            if z == 0:
                raise SingularNetworkError(f"{name} has zero impedance in sequence {seq}")
            Y[k, k] += 1 / z
            if seq == 1:
                J[k] += br.emf / z
        return Y, J

    def norton(self, seq: int, current_sources=None) -> tuple:
        """Norton admittance and current seen from the fault node."""
        Y, J = self.matrices(seq, current_sources)
        k = self._idx[self.fault_node]
        r = [i for i in range(len(self.nodes)) if i != k]
        if self.is_open(seq, current_sources):
            # no path to reference: the port is an exact open circuit and any
            # injected current can only leave through the fault
            return 0j, complex(J.sum())
        Yrr = Y[np.ix_(r, r)]
        Ykr = Y[k, r]
        X = np.linalg.solve(Yrr, np.column_stack([Y[r, k], J[r]]))
        y_n = Y[k, k] - Ykr @ X[:, 0]
        j_n = J[k] - Ykr @ X[:, 1]
        return complex(y_n), complex(j_n)

    def thevenin(self, seq: int, current_sources=None):
        """``(Z_th, E_th)`` at the fault node, or ``(OPEN, None)``."""
        y, j = self.norton(seq, current_sources)
        if self.is_open(seq, current_sources):
            return OPEN, None
        return 1 / y, j / y

    def solve(self, current_sources=None) -> NetworkSolution:
        return solve_fault(self, current_sources=current_sources)


def build_sequence_networks(config: TestSystemConfig, fault: FaultSpec, policies=None) -> SequenceNetworks:
    """Assemble the sequence networks for ``fault`` under ``policies``.

    ``policies`` maps terminal name to ConverterPolicy. Missing terminals use
    the C1 defaults.
    """
    from .ibr import default_policies, negative_sequence_equivalent

    pol = default_policies("C1")
    if policies:
        unknown = set(policies) - set(TERMINALS)
        if unknown:
            raise ValueError(f"unknown terminals in policies: {sorted(unknown)}")
        pol.update(policies)

    d = fault.distance
    if fault.internal and 0.0 < d < 1.0:
        nodes = ("A", "B", "F")
        fault_node = "F"
    else:
        nodes = ("A", "B")
        if fault.internal:
            fault_node = "A" if d == 0.0 else "B"
        else:
            fault_node = fault.external_bus

    zc = tuple(config.cable_impedance(s) for s in (0, 1, 2))
    if fault_node == "F":
        sections = (
            ("A", "F", tuple(d * z for z in zc)),
            ("F", "B", tuple((1 - d) * z for z in zc)),
        )
    else:
        sections = (("A", "B", zc),)

    pre = prefault_state(config)
    branches = {}
    for t in TERMINALS:
        y2 = negative_sequence_equivalent(pol[t], config.source(t).z.z2)
        z2 = OPEN if y2 is OPEN else 1 / y2
        branches[t] = TerminalBranch(
            name=t,
            node=TERMINAL_NODE[t],
            z_series=_terminal_series(config, t),
            z_source=_terminal_source(config, t, z2=z2),
            emf=pre.emf[t],
        )
    return SequenceNetworks(config, fault, pol, nodes, fault_node, sections, branches, pre)


def _solve_port_equations(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve for ``[V0, V1, V2, I0, I1, I2]``.

    Open sequence networks float: their port voltages may be fixed only in
    combination (or not at all) while the currents stay unique. In that case
    the minimum-norm voltages are returned. Undetermined currents are an error.
    """
    if not np.all(np.isfinite(M)) or not np.all(np.isfinite(b)):
        raise SingularNetworkError("non-finite port equations")
    u, sv, vh = np.linalg.svd(M)
    tol = sv[0] * 6 * np.finfo(float).eps if sv[0] > 0 else 0.0
    rank = int(np.sum(sv > tol))
    if rank == 6:
        return np.linalg.solve(M, b)
    null = vh[rank:].conj().T
    if np.any(np.abs(null[3:]) > 1e-9):
        raise SingularNetworkError("fault currents are not determined by the network")
    x, *_ = np.linalg.lstsq(M, b, rcond=None)
    if np.linalg.norm(M @ x - b) > 1e-9 * max(1.0, np.linalg.norm(b)):
        raise SingularNetworkError("fault interconnection is inconsistent")
    return x


def connect_ports(ports, open_port, fault_type: FaultType, r_phase_pu: float, r_ground_pu: float):
    """Sequence voltages and fault currents at the fault point.

    ``ports`` holds one Norton pair ``(Y, J)`` per sequence (order 0, 1, 2)
    with ``Y*V + I = J``. ``open_port`` marks sequences with no path to the
    reference. Returns ``(V012, I012)`` arrays.
    """
    fault_type = FaultType(fault_type)
    # unknowns x = [V0, V1, V2, I0, I1, I2]
    M = np.zeros((6, 6), dtype=complex)
    b = np.zeros(6, dtype=complex)
    for s, (y, j) in enumerate(ports):
        M[s, s] = y
        M[s, 3 + s] = 1.0
        b[s] = j
    R = fault_constraints(fault_type, r_phase_pu, r_ground_pu)
    M[3:, :3] = R[:, :3] @ FORTESCUE
    M[3:, 3:] = R[:, 3:] @ FORTESCUE

    x = _solve_port_equations(M, b)

    # snap quantities that are zero by construction
    V = x[:3].copy()
    I = x[3:].copy()
    if not fault_type.grounded:
        I[0] = 0.0
    if fault_type is FaultType.ABC and ports[2][1] == 0:
        # a symmetric fault cannot excite a passive negative-sequence network
        I[2] = 0.0
        if open_port[2]:
            V[2] = 0.0
    for s in (0, 1, 2):
        y, j = ports[s]
        if open_port[s]:
            if j == 0:
                I[s] = 0.0
        else:
            V[s] = (j - I[s]) / y
    return V, I


def connect_thevenin(z012, e1: complex, fault_type: FaultType, r_phase_pu: float = 0.0,
                     r_ground_pu: float = 0.0):
    """Fault a textbook Thevenin equivalent.

    ``z012`` gives the zero, positive and negative impedances (``OPEN``
    allowed); only the positive sequence carries the source ``e1``.
    """
    ports, open_port = [], []
    for s, z in enumerate(z012):
        if z is OPEN:
            ports.append((0j, 0j))
            open_port.append(True)
            continue
        z = complex(z)
        if z == 0:
            raise SingularNetworkError(f"zero Thevenin impedance in sequence {s}")
        ports.append((1 / z, (e1 if s == 1 else 0) / z))
        open_port.append(False)
    return connect_ports(ports, open_port, fault_type, r_phase_pu, r_ground_pu)


def solve_fault(networks: SequenceNetworks, fault: FaultSpec | None = None, base: PerUnitBase | None = None,
                current_sources=None) -> NetworkSolution:
    """Connect the sequence networks at the fault point and solve.

    The fault is described by its phase-domain constraints mapped onto
    sequence quantities, so series (AG), parallel (AB), mixed (ABG) and
    positive-only (ABC) interconnections all come out of one 6x6 system.
    ``current_sources`` maps limited terminals to the positive-sequence
    current they inject.
    """
    fault = fault or networks.fault
    base = base or networks.base
    current_sources = dict(current_sources or {})
    zb = base.z_base_ohm
    ftype = fault.fault_type

    try:
        ports = [networks.norton(s, current_sources) for s in (0, 1, 2)]
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError(str(exc)) from exc
    open_port = [networks.is_open(s, current_sources) for s in (0, 1, 2)]

    V, I = connect_ports(ports, open_port, ftype, fault.r_phase / zb, fault.r_ground / zb)

    # node voltages with the fault node held at V
    idx = networks._idx
    k = idx[networks.fault_node]
    r = [i for i in range(len(networks.nodes)) if i != k]
    node_v = np.zeros((3, len(networks.nodes)), dtype=complex)
    for s in (0, 1, 2):
        Y, J = networks.matrices(s, current_sources)
        node_v[s, k] = V[s]
        rhs = J[r] - Y[r, k] * V[s]
        try:
            node_v[s, r] = np.linalg.solve(Y[np.ix_(r, r)], rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularNetworkError(str(exc)) from exc

    branch_i = {}
    vterm = {}
    for name, br in networks.branches.items():
        kk = idx[br.node]
        cur = []
        for s in (0, 1, 2):
            if s == 1 and name in current_sources:
                cur.append(complex(current_sources[name]))
                continue
            z = br.z_total(s)
            if z is OPEN:
                cur.append(0j)
                continue
            e = br.emf if s == 1 else 0.0
            cur.append(complex((e - node_v[s, kk]) / z))
        branch_i[name] = SequenceSet(*cur)
        vterm[name] = complex(node_v[1, kk] + cur[1] * br.z_series[1])

    def _bus_sum(node):
        total = np.zeros(3, dtype=complex)
        for name, br in networks.branches.items():
            if br.node == node:
                total += branch_i[name].as_array()
        return total

    p1 = _bus_sum("A")
    p2 = _bus_sum("B")
    if fault.external_bus == "A":
        p1 = p1 - I
    elif fault.external_bus == "B":
        p2 = p2 - I

    return NetworkSolution(
        fault=fault,
        fault_current=SequenceSet.from_array(I),
        fault_voltage=SequenceSet.from_array(V),
        p1=seq_to_abc(SequenceSet.from_array(p1)),
        p2=seq_to_abc(SequenceSet.from_array(p2)),
        branch_currents=branch_i,
        terminal_voltages=vterm,
        node_voltages={n: SequenceSet.from_array(node_v[:, i]) for n, i in idx.items()},
        current_sources=current_sources,
        p1_seq=SequenceSet.from_array(p1),
        p2_seq=SequenceSet.from_array(p2),
    )
