"""Physical constants and unit-safe scalar types shared by all modules.

Everything downstream of the I/O layer works in strict SI (Hz, W, K, F, s).
dBm, GHz, fF and friends appear only at I/O boundaries and in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values in SI units. Compiled in, not configurable."""

    h: float = 6.62607015e-34        # Planck constant, J s (exact in SI)
    kB: float = 1.380649e-23         # Boltzmann constant, J/K (exact in SI)
    eps0: float = 8.8541878128e-12   # vacuum permittivity, F/m

    @property
    def hbar(self) -> float:
        # defined as h/2pi so the identity holds to machine precision
        return self.h / (2.0 * math.pi)


CONSTANTS = PhysicalConstants()


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level in dBm to watts (1e-3 * 10^(p/10))."""
    if not math.isfinite(p_dbm):
        raise ValueError(f"power in dBm must be finite, got {p_dbm!r}")
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert watts to dBm. Exact inverse of :func:`dbm_to_watts`."""
    if not (p_watts > 0):
        raise ValueError(f"power must be positive, got {p_watts!r}")
    return 10.0 * math.log10(p_watts / 1e-3)


@dataclass(frozen=True)
class Power:
    """A power, stored in watts, convertible losslessly to/from dBm."""

    watts: float

    def __post_init__(self):
        if not (self.watts > 0 and math.isfinite(self.watts)):
            raise ValueError(f"power must be positive and finite, got {self.watts!r}")

    @classmethod
    def from_dbm(cls, p_dbm: float) -> "Power":
        return cls(dbm_to_watts(p_dbm))

    @property
    def dbm(self) -> float:
        return watts_to_dbm(self.watts)


@dataclass(frozen=True)
class Temperature:
    """A temperature in kelvin; must be positive."""

    kelvin: float

    def __post_init__(self):
        if not (self.kelvin > 0 and math.isfinite(self.kelvin)):
            raise ValueError(f"temperature must be positive and finite, got {self.kelvin!r}")
