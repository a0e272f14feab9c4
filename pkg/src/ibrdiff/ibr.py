"""Converter behaviour on top of the linear fault solution.

Positive sequence: a converter whose current would exceed its limit becomes
a current source at the limit, injecting reactive current. Negative sequence:
C1 suppresses (open branch, optionally a small residual admittance) and C2
keeps the configured finite negative-sequence impedance.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

from .network import OPEN, TERMINALS, NetworkSolution


class Role(str, enum.Enum):
    GRID_FORMING = "grid-forming"
    GRID_FOLLOWING = "grid-following"


class NegSeqMode(str, enum.Enum):
    C1_SUPPRESS = "C1_suppress"
    C2_PRIORITIZE = "C2_prioritize"

    @classmethod
    def _missing_(cls, value):
        short = {"C1": cls.C1_SUPPRESS, "C2": cls.C2_PRIORITIZE}
        if isinstance(value, str):
            return short.get(value.upper())
        return None

    @property
    def short(self) -> str:
        return self.value[:2]


ANGLE_REFERENCES = ("prefault", "terminal")


@dataclass(frozen=True)
class ConverterPolicy:
    """Fault behaviour of one converter terminal.

    ``i_limit_pos`` and ``residual_neg_admittance`` are in p.u. of the
    converter rating. ``angle_reference`` picks the voltage the limited
    current lags by 90 degrees: the pre-fault terminal voltage, or the
    present post-fault terminal voltage (iterated).
    """

    role: Role = Role.GRID_FOLLOWING
    i_limit_pos: float = 1.1
    neg_seq_mode: NegSeqMode = NegSeqMode.C1_SUPPRESS
    residual_neg_admittance: float = 0.0
    reactive_priority: bool = True
    angle_reference: str = "prefault"

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "neg_seq_mode", NegSeqMode(self.neg_seq_mode))
        if not (math.isfinite(self.i_limit_pos) and self.i_limit_pos > 0):
            raise ValueError(f"i_limit_pos must be positive, got {self.i_limit_pos}")
        if not (math.isfinite(self.residual_neg_admittance) and self.residual_neg_admittance >= 0):
            raise ValueError("residual_neg_admittance must be >= 0")
        if self.angle_reference not in ANGLE_REFERENCES:
            raise ValueError(f"angle_reference must be one of {ANGLE_REFERENCES}")


def negative_sequence_equivalent(policy: ConverterPolicy, z2=None):
    """Negative-sequence admittance of a converter (own-rating p.u.) or OPEN."""
    if policy.neg_seq_mode is NegSeqMode.C1_SUPPRESS:
        g = policy.residual_neg_admittance
        return OPEN if g == 0 else complex(g)
    if z2 is None:
        raise ValueError("C2 needs the converter's negative-sequence impedance")
    if z2 is OPEN:
        return OPEN
    z2 = complex(z2)
    if z2 == 0:
        raise ValueError("negative-sequence impedance must be nonzero")
    return 1 / z2


def default_policies(control="C1", residual_neg_admittance: float = 0.0) -> dict:
    """Wind clusters always suppress; the OMMC follows ``control``."""
    wind = ConverterPolicy(Role.GRID_FOLLOWING, 1.1, NegSeqMode.C1_SUPPRESS)
    return {
        "wind_c1": wind,
        "wind_c2": wind,
        "ommc": ConverterPolicy(
            Role.GRID_FORMING, 1.1, NegSeqMode(control), residual_neg_admittance
        ),
    }


VOLTAGE_SOURCE = "voltage-source"
CURRENT_LIMITED = "current-limited"


@dataclass(frozen=True)
class LimitedSolution:
    """Network solution after converter limiting.

    Attribute access falls through to the wrapped NetworkSolution, so
    ``p1``, ``p2`` and ``i_fault_magnitude`` work directly.
    """

    solution: NetworkSolution
    modes: dict
    iteration_count: int
    converged: bool
    current_pu: dict = field(default_factory=dict)  # |I1| on own rating
    linear_current_pu: dict = field(default_factory=dict)
    switch_current_pu: dict = field(default_factory=dict)  # |I1| when it switched

    def __getattr__(self, name):
        inner = self.__dict__.get("solution")
        if inner is None or name.startswith("__"):
            raise AttributeError(name)
        return getattr(inner, name)


def _reference_unit(policy, terminal, sol, networks) -> complex:
    if policy.angle_reference == "terminal":
        v = sol.terminal_voltages[terminal]
    else:
        v = networks.prefault.terminal_voltages[terminal]
    return cmath.exp(1j * cmath.phase(v))


def apply_policies(solution, policies: dict, networks, tol: float = 1e-8, max_iter: int = 50) -> LimitedSolution:
    """Fixed-point current limiting.

    Each pass compares every voltage-source converter against its limit and
    turns the offenders into current sources; mode switching is one-way.
    The loop stops when no converter switches and every limited source moved
    less than ``tol`` since the previous pass. ``iteration_count`` counts
    the network solutions used, including the one passed in.

    A converter can be pushed over its limit only after others have been
    clamped, so ``switch_current_pu`` records the current that triggered
    each switch; ``linear_current_pu`` keeps the first solution's values.
    """
    solution_in = solution
    if isinstance(solution, LimitedSolution):
        solution = solution.solution
    config = networks.config
    s_base = config.s_base_mva
    rating = {t: config.rating(t) for t in TERMINALS}
    limit = {t: policies[t].i_limit_pos * rating[t] / s_base for t in policies}

    def _own_pu(sol):
        return {t: abs(sol.branch_currents[t].positive) * s_base / rating[t] for t in TERMINALS}

    linear = _own_pu(solution)
    sol = solution
    sources = dict(sol.current_sources)
    switched = {}
    if isinstance(solution_in, LimitedSolution):
        linear = dict(solution_in.linear_current_pu)
        switched.update(solution_in.switch_current_pu)
    count = 1
    converged = False
    while True:
        new = dict(sources)
        for t, pol in policies.items():
            i1 = sol.branch_currents[t].positive
            if t in sources:
                if pol.angle_reference == "terminal" and pol.reactive_priority:
                    new[t] = limit[t] * _reference_unit(pol, t, sol, networks) * -1j
            elif abs(i1) > limit[t]:
                switched[t] = abs(i1) * s_base / rating[t]
                if pol.reactive_priority:
                    new[t] = limit[t] * _reference_unit(pol, t, sol, networks) * -1j
                else:
                    new[t] = limit[t] * i1 / abs(i1)
        if new.keys() == sources.keys() and all(abs(new[t] - sources[t]) < tol for t in new):
            converged = True
            break
        if count >= max_iter:
            break
        sol = networks.solve(new)
        sources = new
        count += 1

    modes = {t: CURRENT_LIMITED if t in sources else VOLTAGE_SOURCE for t in TERMINALS}
    return LimitedSolution(sol, modes, count, converged, _own_pu(sol), linear, switched)
