"""Floquet-Lindblad simulation of flux-modulated, driven, dissipative Kerr resonators.

Modules
-------
fock
    Truncated Fock space, superoperators, model Hamiltonian and observables.
lindblad
    Steady states of the unmodulated resonator, S21 and power calibration.
floquet
    Harmonic balance, one-period Floquet maps and Floquet Liouvillian spectra.
effective
    Bessel-sideband and multiphoton reductions.
chaos
    Complex spacing ratios, unfolding and random-matrix references.
cli
    Sweep orchestration (``kerr-lzsm`` entry point).

Units: hbar = 1, rates in rad/us.  Use :func:`params.mhz` or
:meth:`ModelParams.from_mhz` to convert ordinary frequencies in MHz.
"""
from __future__ import annotations

__version__ = "0.1.0"

from . import chaos, effective, floquet, fock, lindblad  # noqa: E402
from .exceptions import *  # noqa: E402,F401,F403
from .params import DUFFING32, KERR10, KERR10_CHI5, PRESETS, ModelParams, get_preset, mhz, to_mhz  # noqa: E402

__all__ = [
    "__version__",
    "chaos",
    "effective",
    "floquet",
    "fock",
    "lindblad",
    "ModelParams",
    "KERR10",
    "KERR10_CHI5",
    "DUFFING32",
    "PRESETS",
    "get_preset",
    "mhz",
    "to_mhz",
]
