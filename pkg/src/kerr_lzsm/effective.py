"""Analytic reductions of the modulated resonator.

Frequency modulation ``zeta cos(Omega t) n`` is removed by the gauge
transformation ``exp(i (zeta/Omega) sin(Omega t) n)``, after which the drive
becomes a comb of sidebands ``F J_m(zeta/Omega) exp(i m Omega t)`` (Jacobi-Anger).
Keeping only the sideband ``m_bar`` closest to the detuning gives a static Kerr
resonator with renormalized detuning and drive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lindblad
from .exceptions import DomainError, NoMultiphotonStructureError
from .params import ModelParams

BESSEL_MAX_ORDER = 200
BESSEL_MAX_ARG = 1e4


def _bessel_sequence(order: int, x: float) -> np.ndarray:
    """J_0(x), ..., J_order(x) for x > 0 by Miller's backward recurrence.

    Normalized with the identity J_0 + 2 sum_k J_2k = 1.
    """
    start = max(order, int(x)) + 50 + int(10 * x ** (1 / 3))
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1e-300
    for k in range(start, 0, -1):
        vals[k - 1] = (2 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1 :] *= 1e-250
    norm = vals[0] + 2 * vals[2:start + 1:2].sum()
    return vals[: order + 1] / norm


def _bessel_series(m: int, x: float) -> float:
    # power series, used only for |x| tiny where three terms are exact to double precision
    h = 0.5 * x
    # log(x) - log(2) rather than log(h): h underflows for subnormal x
    lead = math.exp(m * (math.log(x) - math.log(2.0)) - math.lgamma(m + 1)) if m else 1.0
    t1 = -h * h / (m + 1)
    t2 = h**4 / (2 * (m + 1) * (m + 2))
    return lead * (1 + t1 + t2)


def bessel_j(m: int, x: float) -> float:
    """Bessel function of the first kind J_m(x) for integer order.

    Accurate to about 1e-12 absolute for ``|m| <= 200`` and ``|x| <= 1e4``.

    Raises
    ------
    DomainError
        Outside that range or for non-integer order.
    """
    if int(m) != m:
        raise DomainError(f"order must be an integer, got {m!r}")
    m = int(m)
    x = float(x)
    if abs(m) > BESSEL_MAX_ORDER or not abs(x) <= BESSEL_MAX_ARG:
        raise DomainError(f"bessel_j defined for |m| <= {BESSEL_MAX_ORDER}, |x| <= {BESSEL_MAX_ARG:g}")
    sign = 1.0
    if m < 0:
        m = -m
        sign *= (-1) ** m
    if x < 0:
        x = -x
        sign *= (-1) ** m
    if x == 0.0:
        return sign * (1.0 if m == 0 else 0.0)
    if x < 1e-5:
        return sign * _bessel_series(m, x)
    return sign * float(_bessel_sequence(m, x)[m])


def bessel_j_orders(orders, x: float) -> np.ndarray:
    """J_m(x) for every integer ``m`` in ``orders`` with one recurrence."""
    orders = np.asarray(orders, dtype=int)
    top = int(np.max(np.abs(orders))) if orders.size else 0
    if top > BESSEL_MAX_ORDER or not abs(x) <= BESSEL_MAX_ARG:
        raise DomainError("order or argument outside the supported range")
    if x == 0 or abs(x) < 1e-5:
        return np.array([bessel_j(int(m), x) for m in orders])
    seq = _bessel_sequence(top, abs(x))
    k = np.abs(orders)
    sign = np.where((orders < 0) & (k % 2 == 1), -1.0, 1.0)
    if x < 0:
        sign = sign * np.where(k % 2 == 1, -1.0, 1.0)
    return sign * seq[k]


def select_mbar(delta: float, omega_mod: float) -> int:
    """Sideband index minimizing |delta - m omega_mod|.

    Exact half-way ties go to the smaller |m|.
    """
    if not omega_mod > 0:
        raise DomainError("omega_mod must be > 0")
    lo = math.floor(delta / omega_mod)
    best = None
    for m in (lo - 1, lo, lo + 1, lo + 2):
        key = (abs(delta - m * omega_mod), abs(m), m)
        if best is None or key < best[0]:
            best = (key, m)
    return best[1]


@dataclass(frozen=True)
class EffectiveMode:
    m_bar: int
    delta_eff: float
    drive_eff: float


def effective_mode(p: ModelParams, m_bar: int | None = None) -> EffectiveMode:
    """Single-sideband reduction (Delta - m Omega, F J_m(zeta/Omega)).

    ``m_bar`` defaults to the nearest sideband.  The Bessel sign is kept.
    """
    if p.omega_mod <= 0:
        if p.zeta != 0:
            raise DomainError("omega_mod must be > 0")
        return EffectiveMode(0, p.delta, p.drive_F)
    if m_bar is None:
        m_bar = select_mbar(p.delta, p.omega_mod)
    F_eff = p.drive_F * bessel_j(m_bar, p.zeta / p.omega_mod)
    return EffectiveMode(int(m_bar), p.delta - m_bar * p.omega_mod, F_eff)


def analytic_photon_number(mode: EffectiveMode, kappa: float, kappa_phi: float, beta: int = 1) -> float:
    """Weak-drive photon number of the effective mode.

    n = (4 F^2 / kappa) (kappa + beta kappa_phi) / (4 Delta^2 + (kappa + beta kappa_phi)^2)

    ``beta = 1`` is the linear resonator; ``beta = 4`` the two-level limit,
    where dephasing of the sigma_z type doubles the coherence decay.
    """
    if kappa <= 0:
        raise DomainError("kappa must be > 0")
    g = kappa + beta * kappa_phi
    return 4 * mode.drive_eff**2 / kappa * g / (4 * mode.delta_eff**2 + g**2)


def effective_steady(mode: EffectiveMode, p: ModelParams, dim: int, warn: bool = True):
    """Full Lindblad steady state of the single-sideband Hamiltonian.

    Dissipators are unchanged; only (Delta, F) are replaced and the
    modulation is dropped.
    """
    q = p.replace(delta=mode.delta_eff, drive_F=mode.drive_eff, zeta=0.0)
    return lindblad.steady_state(q, dim, warn=warn)


@dataclass(frozen=True)
class MultiphotonMode:
    n: int
    m_bar: int
    regime: str
    delta_eff: float
    g_eff: float
    chi: float

    @property
    def level_energy(self) -> float:
        """Rotating-frame energy of |n>, n(-delta_eff + (n-1) chi)."""
        return self.n * (-self.delta_eff + (self.n - 1) * self.chi)


def multiphoton_mode(
    p: ModelParams, n: int, m_bar: int, regime: str = "strong", prefactor: float = 1.0
) -> MultiphotonMode:
    """Effective |0> <-> |n> coupling on sideband ``m_bar``.

    strong (Omega >> |chi|): delta_eff = Delta - m Omega,
        G = F^2/chi J_m(zeta/Omega)^2, and prefactor F^n/chi^(n-1) J_m^n for n > 2.
    weak (Omega << |chi|): delta_eff = Delta - m Omega / n,
        G = F^2/chi J_m(2 zeta/Omega), and prefactor F^n/chi^(n-1) J_m(n zeta/Omega) for n > 2.

    Only n = 2 is quantitative; for larger n the prefactor is a free
    parameter (default 1).
    """
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    n = int(n)
    if p.chi == 0:
        raise NoMultiphotonStructureError("chi = 0: no multiphoton resonances")
    if regime not in ("strong", "weak"):
        raise ValueError("regime must be 'strong' or 'weak'")
    if p.zeta != 0 and p.omega_mod <= 0:
        raise DomainError("omega_mod must be > 0")
    ratio = p.zeta / p.omega_mod if p.omega_mod > 0 else 0.0
    base = p.drive_F**n / p.chi ** (n - 1)
    if regime == "strong":
        delta_eff = p.delta - m_bar * p.omega_mod
        g = base * bessel_j(m_bar, ratio) ** n
    else:
        delta_eff = p.delta - m_bar * p.omega_mod / n
        g = base * bessel_j(m_bar, n * ratio)
    if n > 2:
        g *= prefactor
    return MultiphotonMode(n, int(m_bar), regime, delta_eff, g, p.chi)


def multiphoton_resonance(chi: float, omega_mod: float, n: int, m_bar: int, regime: str = "strong") -> float:
    """Detuning of the m-th sideband of the |0> -> |n> resonance."""
    step = omega_mod if regime == "strong" else omega_mod / n
    return (n - 1) * chi + m_bar * step


def two_level_steady(g: float, delta2: float, kappa: float, kappa_phi: float, n: int = 2) -> float:
    """Steady population of |n> in the driven |0> <-> |n> two-level model.

    H = delta2 |n><n| + g (|0><n| + h.c.), decay |n> -> |0> at n kappa and
    dephasing D[n |n><n|] at kappa_phi, i.e. coherence decay
    (n kappa + n^2 kappa_phi) / 2.  Closed-form Bloch steady state.
    """
    if kappa <= 0:
        raise DomainError("kappa must be > 0")
    gamma = n * kappa
    gamma2 = 0.5 * (n * kappa + n * n * kappa_phi)
    num = 2 * g * g * gamma2
    return num / (gamma * (delta2**2 + gamma2**2) + 4 * g * g * gamma2)
