"""Physical parameters of the modulated Kerr resonator.

All rates are angular frequencies in rad/us (hbar = 1).  Configuration
files speak ordinary frequencies in MHz; :meth:`ModelParams.from_mhz` and
:meth:`ModelParams.to_mhz` do the 2*pi conversion at the boundary.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidRateError

TWO_PI = 2.0 * np.pi

_RATE_FIELDS = (
    "delta",
    "chi",
    "chi5",
    "drive_F",
    "zeta",
    "omega_mod",
    "kappa_ext",
    "kappa_int",
    "kappa_phi",
    "omega_d",
)


def mhz(value):
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * value


def to_mhz(value):
    return value / TWO_PI


@dataclass(frozen=True)
class ModelParams:
    delta: float = 0.0
    chi: float = 0.0
    chi5: float = 0.0
    drive_F: float = 0.0
    zeta: float = 0.0
    omega_mod: float = 0.0
    kappa_ext: float = 0.0
    kappa_int: float = 0.0
    kappa_phi: float = 0.0
    omega_d: float = 0.0

    def __post_init__(self):
        for name in _RATE_FIELDS:
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InvalidRateError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        for name in ("kappa_ext", "kappa_int", "kappa_phi"):
            if getattr(self, name) < 0:
                raise InvalidRateError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.kappa <= 0:
            raise InvalidRateError("total loss kappa_ext + kappa_int must be > 0")
        if self.zeta != 0 and self.omega_mod <= 0:
            raise InvalidRateError("omega_mod must be > 0 when zeta != 0")
        if self.omega_mod < 0:
            raise InvalidRateError("omega_mod must be >= 0")

    @property
    def kappa(self) -> float:
        return self.kappa_ext + self.kappa_int

    @property
    def period(self) -> float:
        return TWO_PI / self.omega_mod

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mhz(cls, **values) -> "ModelParams":
        """Build from ordinary frequencies in MHz (keys are field names)."""
        unknown = set(values) - set(_RATE_FIELDS)
        if unknown:
            raise TypeError(f"unknown parameters: {sorted(unknown)}")
        return cls(**{k: mhz(v) for k, v in values.items()})

    def to_mhz(self) -> dict:
        return {name: to_mhz(getattr(self, name)) for name in _RATE_FIELDS}

    def with_mhz(self, **values) -> "ModelParams":
        """Copy with some fields overridden, values given in MHz."""
        return self.replace(**{k: mhz(v) for k, v in values.items()})


# Device presets (working-point values).  omega_mod defaults to 30 MHz, the
# modulation frequency used for most LZSM maps; drive and modulation are off.
KERR10 = ModelParams.from_mhz(
    chi=-23.5,
    kappa_int=1.1,
    kappa_ext=3.75,
    kappa_phi=0.75,
    omega_mod=30.0,
    omega_d=4502.0,
)

KERR10_CHI5 = KERR10.with_mhz(chi5=-1.1)

DUFFING32 = ModelParams.from_mhz(
    chi=-0.35,
    kappa_int=4.92,
    kappa_ext=1.49,
    kappa_phi=0.4,
    omega_mod=30.0,
    omega_d=4306.0,
)

PRESETS = {
    "KERR10": KERR10,
    "KERR10_CHI5": KERR10_CHI5,
    "DUFFING32": DUFFING32,
}


def get_preset(name: str) -> ModelParams:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown device preset {name!r}; choose from {sorted(PRESETS)}") from None
