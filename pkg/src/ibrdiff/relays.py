"""Percentage differential elements 87L (per phase), 87Q and 87G.

Both terminal currents are measured into the protected zone, so a through
current gives a small operating quantity and an internal fault a large one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phasor import ThreePhaseSet, abc_to_seq

ELEMENTS = ("87L_a", "87L_b", "87L_c", "87Q", "87G")


@dataclass(frozen=True)
class RelaySettings:
    """Slope ``k_slope`` and minimum pickup ``k0_pickup`` (p.u. of nominal current)."""

    k_slope: float = 0.5
    k0_pickup: float = 0.3

    def __post_init__(self):
        if not (math.isfinite(self.k_slope) and 0 <= self.k_slope < 1):
            raise ValueError(f"k_slope must lie in [0, 1), got {self.k_slope}")
        if not (math.isfinite(self.k0_pickup) and self.k0_pickup >= 0):
            raise ValueError(f"k0_pickup must be >= 0, got {self.k0_pickup}")

    def threshold(self, i_rst: float) -> float:
        return self.k_slope * i_rst + self.k0_pickup


@dataclass(frozen=True)
class DifferentialPoint:
    i_rst: float
    i_op: float

    def __post_init__(self):
        if self.i_rst < 0 or self.i_op < 0:
            raise ValueError("differential quantities are magnitudes")
        if self.i_op > self.i_rst + 1e-12 * max(1.0, self.i_rst):
            raise ValueError("i_op cannot exceed i_rst")


@dataclass(frozen=True)
class TripDecision:
    element: str
    point: DifferentialPoint
    trip: bool


def differential_point(i_local: complex, i_remote: complex) -> DifferentialPoint:
    """Operating ``|I_loc + I_rem|`` and restraint ``|I_loc| + |I_rem|``."""
    return DifferentialPoint(abs(i_local) + abs(i_remote), abs(i_local + i_remote))


def evaluate_element(point: DifferentialPoint, settings: RelaySettings = RelaySettings(), element: str = "") -> TripDecision:
    # equality restrains
    trip = point.i_op > settings.threshold(point.i_rst)
    return TripDecision(element, point, bool(trip))


def element_currents(p1: ThreePhaseSet, p2: ThreePhaseSet, sequences=None) -> dict:
    """Local/remote phasor pair feeding each element.

    ``sequences`` optionally supplies the already known sequence sets of p1
    and p2, which keeps exact zeros exact.
    """
    s1, s2 = sequences if sequences is not None else (abc_to_seq(p1), abc_to_seq(p2))
    return {
        "87L_a": (p1.a, p2.a),
        "87L_b": (p1.b, p2.b),
        "87L_c": (p1.c, p2.c),
        "87Q": (s1.negative, s2.negative),
        "87G": (s1.zero, s2.zero),
    }


def evaluate_all(p1: ThreePhaseSet, p2: ThreePhaseSet, settings: RelaySettings = RelaySettings(),
                 sequences=None) -> dict:
    """Verdicts of all five elements, keyed in ``ELEMENTS`` order."""
    pairs = element_currents(p1, p2, sequences)
    return {
        e: evaluate_element(differential_point(*pairs[e]), settings, e)
        for e in ELEMENTS
    }


def boundary(settings: RelaySettings = RelaySettings(), i_rst_max: float = 10.0, n: int = 100) -> np.ndarray:
    """``n`` points of the characteristic ``i_op = K*i_rst + K0`` as (i_rst, i_op) rows."""
    i_rst = np.linspace(0.0, i_rst_max, n)
    return np.column_stack([i_rst, settings.k_slope * i_rst + settings.k0_pickup])
