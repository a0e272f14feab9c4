"""Phasor helpers, phase/sequence sets and per-unit bases.

Phasors are plain Python ``complex`` numbers in rectangular form. The
Fortescue transform uses the relaying convention with a 1/3 factor on the
forward (abc -> 012) direction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

ALPHA = complex(-0.5, math.sqrt(3) / 2)  # 1∠120°

# abc = FORTESCUE @ [zero, positive, negative]
FORTESCUE = np.array(
    [
        [1, 1, 1],
        [1, ALPHA**2, ALPHA],
        [1, ALPHA, ALPHA**2],
    ],
    dtype=complex,
)
FORTESCUE_INV = np.array(
    [
        [1, 1, 1],
        [1, ALPHA, ALPHA**2],
        [1, ALPHA**2, ALPHA],
    ],
    dtype=complex,
) / 3


def phasor(magnitude: float, angle_deg: float = 0.0) -> complex:
    """Return ``magnitude∠angle_deg`` as a complex number."""
    return cmath.rect(magnitude, math.radians(angle_deg))


def normalize_angle(angle_deg: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    wrapped = math.fmod(angle_deg, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped


def polar(z: complex) -> tuple[float, float]:
    """Return ``(magnitude, angle_deg)`` with the angle in (-180, 180]."""
    return abs(z), normalize_angle(math.degrees(cmath.phase(z)))


def _check_finite(name: str, values) -> None:
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"{name} components must be finite, got {values!r}")


@dataclass(frozen=True)
class ThreePhaseSet:
    """Phase quantities (a, b, c) in p.u."""

    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        for f in ("a", "b", "c"):
            object.__setattr__(self, f, complex(getattr(self, f)))
        _check_finite("ThreePhaseSet", (self.a, self.b, self.c))

    @classmethod
    def from_array(cls, values) -> ThreePhaseSet:
        a, b, c = (complex(v) for v in values)
        return cls(a, b, c)

    @classmethod
    def balanced(cls, magnitude: float = 1.0, angle_deg: float = 0.0) -> ThreePhaseSet:
        """Positive-sequence (abc rotation) set referenced to phase a."""
        a = phasor(magnitude, angle_deg)
        return cls(a, a * ALPHA**2, a * ALPHA)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=complex)

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def __add__(self, other: ThreePhaseSet) -> ThreePhaseSet:
        return ThreePhaseSet(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: ThreePhaseSet) -> ThreePhaseSet:
        return ThreePhaseSet(self.a - other.a, self.b - other.b, self.c - other.c)

    def __neg__(self) -> ThreePhaseSet:
        return ThreePhaseSet(-self.a, -self.b, -self.c)

    def __mul__(self, k: complex) -> ThreePhaseSet:
        return ThreePhaseSet(self.a * k, self.b * k, self.c * k)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SequenceSet:
    """Symmetrical components (zero, positive, negative) in p.u."""

    zero: complex
    positive: complex
    negative: complex

    def __post_init__(self):
        for f in ("zero", "positive", "negative"):
            object.__setattr__(self, f, complex(getattr(self, f)))
        _check_finite("SequenceSet", (self.zero, self.positive, self.negative))

    @classmethod
    def from_array(cls, values) -> SequenceSet:
        z, p, n = (complex(v) for v in values)
        return cls(z, p, n)

    def as_array(self) -> np.ndarray:
        return np.array([self.zero, self.positive, self.negative], dtype=complex)

    def __getitem__(self, seq: int) -> complex:
        # index by sequence number: 0 zero, 1 positive, 2 negative
        return (self.zero, self.positive, self.negative)[seq]

    def __iter__(self):
        return iter((self.zero, self.positive, self.negative))

    def __add__(self, other: SequenceSet) -> SequenceSet:
        return SequenceSet(
            self.zero + other.zero,
            self.positive + other.positive,
            self.negative + other.negative,
        )

    def __sub__(self, other: SequenceSet) -> SequenceSet:
        return SequenceSet(
            self.zero - other.zero,
            self.positive - other.positive,
            self.negative - other.negative,
        )

    def __neg__(self) -> SequenceSet:
        return SequenceSet(-self.zero, -self.positive, -self.negative)

    def __mul__(self, k: complex) -> SequenceSet:
        return SequenceSet(self.zero * k, self.positive * k, self.negative * k)

    __rmul__ = __mul__


def abc_to_seq(abc: ThreePhaseSet) -> SequenceSet:
    """Fortescue transform: phase set -> (zero, positive, negative)."""
    a, b, c = abc.a, abc.b, abc.c
    a2 = ALPHA * ALPHA
    return SequenceSet(
        (a + b + c) / 3,
        (a + ALPHA * b + a2 * c) / 3,
        (a + a2 * b + ALPHA * c) / 3,
    )


def seq_to_abc(seq: SequenceSet) -> ThreePhaseSet:
    """Inverse Fortescue transform."""
    z, p, n = seq.zero, seq.positive, seq.negative
    a2 = ALPHA * ALPHA
    return ThreePhaseSet(z + p + n, z + a2 * p + ALPHA * n, z + ALPHA * p + a2 * n)


@dataclass(frozen=True)
class PerUnitBase:
    """Three-phase per-unit base from apparent power and line-to-line voltage."""

    s_base_mva: float
    v_base_kv: float

    def __post_init__(self):
        if not (self.s_base_mva > 0 and math.isfinite(self.s_base_mva)):
            raise ValueError(f"s_base_mva must be positive, got {self.s_base_mva}")
        if not (self.v_base_kv > 0 and math.isfinite(self.v_base_kv)):
            raise ValueError(f"v_base_kv must be positive, got {self.v_base_kv}")

    @property
    def z_base_ohm(self) -> float:
        return self.v_base_kv**2 / self.s_base_mva

    @property
    def i_base_ka(self) -> float:
        return self.s_base_mva / (math.sqrt(3) * self.v_base_kv)

    def rebase(self, z_pu: complex, rating_mva: float) -> complex:
        """Move an impedance from an equipment rating onto this base."""
        if rating_mva <= 0:
            raise ValueError(f"rating_mva must be positive, got {rating_mva}")
        return z_pu * self.s_base_mva / rating_mva


_BASE_ATTR = {
    "voltage": "v_base_kv",
    "power": "s_base_mva",
    "impedance": "z_base_ohm",
    "current": "i_base_ka",
}


def to_per_unit(value, base: PerUnitBase, kind: str):
    """Divide a physical quantity by its base.

    ``kind`` is one of ``voltage`` (kV), ``power`` (MVA), ``impedance`` (ohm)
    or ``current`` (kA).
    """
    try:
        attr = _BASE_ATTR[kind]
    except KeyError:
        raise ValueError(f"unknown quantity kind {kind!r}") from None
    return value / getattr(base, attr)
