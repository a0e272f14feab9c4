"""Brute-force phase-domain solver used to cross-check the sequence solution.

Every bus is three phase nodes. Converter branches become 3x3 Norton shunts,
cable sections 3x3 series admittances, and the CTs and fault resistors are
explicit branches in a modified nodal analysis (MNA) system, so zero
resistance needs no special case.
"""

from __future__ import annotations

import numpy as np

from .network import (
    OPEN,
    TERMINAL_NODE,
    TERMINALS,
    FaultSpec,
    FaultType,
    NetworkSolution,
    SingularNetworkError,
    TestSystemConfig,
    _terminal_series,
    _terminal_source,
    prefault_state,
)
from .phasor import FORTESCUE, FORTESCUE_INV, ThreePhaseSet, abc_to_seq


def _abc_matrix(diag012) -> np.ndarray:
    """Phase-domain matrix of a sequence-diagonal element (order 0, 1, 2)."""
    return FORTESCUE @ np.diag(diag012) @ FORTESCUE_INV


class _MNA:
    """Three-phase buses plus scalar MNA branches."""

    def __init__(self, buses, scalars=()):
        self.ids = {}
        for bus in buses:
            for p in range(3):
                self.ids[(bus, p)] = len(self.ids)
        for name in scalars:
            self.ids[(name, 0)] = len(self.ids)
        self.shunts = []  # (bus, Y3, J3)
        self.series = []  # (bus_i, bus_j, Y3)
        self.branches = []  # (name, i, j, r): V_i - V_j - r*I = 0, I from i to j

    def id(self, bus, phase):
        return self.ids[(bus, phase)]

    def solve(self):
        n = len(self.ids)
        size = n + len(self.branches)
        M = np.zeros((size, size), dtype=complex)
        b = np.zeros(size, dtype=complex)
        for bus, Y3, J3 in self.shunts:
            ix = [self.id(bus, p) for p in range(3)]
            M[np.ix_(ix, ix)] += Y3
            b[ix] += J3
        for i, j, Y3 in self.series:
            ii = [self.id(i, p) for p in range(3)]
            jj = [self.id(j, p) for p in range(3)]
            M[np.ix_(ii, ii)] += Y3
            M[np.ix_(jj, jj)] += Y3
            M[np.ix_(ii, jj)] -= Y3
            M[np.ix_(jj, ii)] -= Y3
        for k, (_, i, j, r) in enumerate(self.branches):
            row = n + k
            if i is not None:
                M[i, row] += 1
                M[row, i] += 1
            if j is not None:
                M[j, row] -= 1
                M[row, j] -= 1
            M[row, row] -= r
        # a sequence mode with no path to ground leaves the matrix singular;
        # the currents are still unique, so fall back to least squares
        if np.linalg.matrix_rank(M) == size:
            x = np.linalg.solve(M, b)
        else:
            x, *_ = np.linalg.lstsq(M, b, rcond=None)
            if np.linalg.norm(M @ x - b) > 1e-9 * max(1.0, np.linalg.norm(b)):
                raise SingularNetworkError("phase-domain system is inconsistent")
        return x[:n], {name: x[n + k] for k, (name, *_rest) in enumerate(self.branches)}


def brute_force_phase_solve(config: TestSystemConfig, fault: FaultSpec, policies=None,
                            current_sources=None) -> NetworkSolution:
    """Phase-domain nodal solution of the same fault.

    Buses are split at the CTs (``A_bus``/``A_cab`` and ``B_bus``/``B_cab``)
    so P1 and P2 are read directly off the CT branch currents.
    """
    from .ibr import default_policies, negative_sequence_equivalent

    pol = default_policies("C1")
    pol.update(policies or {})
    current_sources = current_sources or {}
    zb = config.base.z_base_ohm
    pre = prefault_state(config)

    d = fault.distance
    interior = fault.internal and 0.0 < d < 1.0
    buses = ["A_bus", "A_cab", "B_bus", "B_cab"]
    if interior:
        buses.append("F")
    # star point of the fault resistors
    scalars = ("S",) if fault.fault_type in (FaultType.ABG, FaultType.ABC) else ()
    net = _MNA(buses, scalars)

    bus_of = {"A": "A_bus", "B": "B_bus"}
    for t in TERMINALS:
        y2 = negative_sequence_equivalent(pol[t], config.source(t).z.z2)
        z2 = OPEN if y2 is OPEN else 1 / y2
        zs = _terminal_series(config, t)
        zsrc = _terminal_source(config, t, z2=z2)
        ydiag = []
        for s in (0, 1, 2):
            if zs[s] is OPEN or zsrc[s] is OPEN or (s == 1 and t in current_sources):
                ydiag.append(0j)
            else:
                ydiag.append(1 / (zs[s] + zsrc[s]))
        Y3 = _abc_matrix(ydiag)
        if t in current_sources:
            J3 = FORTESCUE @ np.array([0, current_sources[t], 0])
        else:
            J3 = Y3 @ (FORTESCUE @ np.array([0, pre.emf[t], 0]))
        net.shunts.append((bus_of[TERMINAL_NODE[t]], Y3, J3))

    zc = [config.cable_impedance(s) for s in (0, 1, 2)]
    if interior:
        sections = [("A_cab", "F", d), ("F", "B_cab", 1 - d)]
    else:
        sections = [("A_cab", "B_cab", 1.0)]
    for i, j, frac in sections:
        Z3 = _abc_matrix([frac * z for z in zc])
        net.series.append((i, j, np.linalg.inv(Z3)))

    # CT branches, zero impedance, current from bus into cable
    for side in ("A", "B"):
        for p in range(3):
            net.branches.append(
                (f"ct{side}{p}", net.id(f"{side}_bus", p), net.id(f"{side}_cab", p), 0.0)
            )

    if interior:
        fnode = "F"
    elif fault.internal:
        fnode = "A_cab" if d == 0.0 else "B_cab"
    else:
        fnode = bus_of[fault.external_bus]

    rph = fault.r_phase / zb
    rg = fault.r_ground / zb
    ft = fault.fault_type
    fid = lambda p: net.id(fnode, p)  # noqa: E731
    if ft is FaultType.AG:
        net.branches.append(("fa", fid(0), None, rg))
    elif ft is FaultType.AB:
        net.branches.append(("fa", fid(0), fid(1), rph))
    elif ft is FaultType.ABG:
        s = net.id("S", 0)
        net.branches.append(("fa", fid(0), s, rph))
        net.branches.append(("fb", fid(1), s, rph))
        net.branches.append(("fg", s, None, rg))
    else:
        s = net.id("S", 0)
        net.branches.append(("fa", fid(0), s, rph))
        net.branches.append(("fb", fid(1), s, rph))
        net.branches.append(("fc", fid(2), s, rph))

    v, br = net.solve()
    if_abc = np.zeros(3, dtype=complex)
    if_abc[0] = br["fa"]
    if ft is FaultType.AB:
        if_abc[1] = -br["fa"]
    elif ft in (FaultType.ABG, FaultType.ABC):
        if_abc[1] = br["fb"]
        if ft is FaultType.ABC:
            if_abc[2] = br["fc"]

    p1 = ThreePhaseSet(*(br[f"ctA{p}"] for p in range(3)))
    p2 = ThreePhaseSet(*(br[f"ctB{p}"] for p in range(3)))
    vf = ThreePhaseSet(*(v[fid(p)] for p in range(3)))
    nodes = {
        name: abc_to_seq(ThreePhaseSet(*(v[net.id(name, p)] for p in range(3))))
        for name in ("A_bus", "B_bus") + (("F",) if interior else ())
    }
    return NetworkSolution(
        fault=fault,
        fault_current=abc_to_seq(ThreePhaseSet.from_array(if_abc)),
        fault_voltage=abc_to_seq(vf),
        p1=p1,
        p2=p2,
        branch_currents={},
        terminal_voltages={},
        node_voltages=nodes,
        current_sources=dict(current_sources),
    )

