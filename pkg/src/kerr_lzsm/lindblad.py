"""Unmodulated resonator: steady states, transmission and calibration."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import partial

import numpy as np
import scipy.linalg as la
from scipy.constants import hbar
from scipy.signal import find_peaks

from . import fock
from ._parallel import parallel_map
from .exceptions import (
    CutoffWarning,
    DegenerateAsymmetryError,
    OutOfValidityError,
    SolverFailure,
    UndefinedTransmissionError,
    UseFloquetModuleError,
)
from .params import DUFFING32, KERR10, KERR10_CHI5, ModelParams  # noqa: F401  (re-export)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class SteadyResult:
    rho: np.ndarray
    photon_number: float
    coherence_a: complex
    cutoff_used: int

    @classmethod
    def from_rho(cls, rho):
        return cls(rho, fock.photon_number(rho), fock.coherence(rho), rho.shape[0])

    def population(self, n: int) -> float:
        return float(np.real(self.rho[n, n]))


def solve_kernel(L: np.ndarray, dim: int) -> np.ndarray:
    """Unit-trace density matrix spanning the kernel of a Liouvillian.

    The last row of ``L`` (the equation for the top population) is replaced by
    the trace functional and the system is solved by LU with partial
    pivoting.  When the estimated condition number exceeds ``COND_LIMIT`` the
    right singular vector of the smallest singular value is used instead.
    """
    n = dim * dim
    A = np.array(L, dtype=complex, copy=True)
    trace_row = np.zeros(n, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    A[-1, :] = trace_row
    b = np.zeros(n, dtype=complex)
    b[-1] = 1.0
    anorm = np.linalg.norm(A, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(A, check_finite=True)
    rcond, _ = la.lapack.zgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if cond <= COND_LIMIT:
        x = la.lu_solve((lu, piv), b)
    else:
        _, s, vh = la.svd(L)
        if s[-2] <= 1e-12 * s[0]:
            raise SolverFailure(
                f"Liouvillian kernel is not one-dimensional (cond ~ {cond:.3g})", condition=cond
            )
        x = vh[-1].conj()
        tr = x @ trace_row
        if abs(tr) < 1e-14:
            raise SolverFailure("kernel vector has zero trace", condition=cond)
        x = x / tr
    rho = fock.unvec(x, dim)
    return 0.5 * (rho + rho.conj().T)


def steady_state(p: ModelParams, dim: int, warn: bool = True) -> SteadyResult:
    """Stationary state of the unmodulated master equation.

    Raises
    ------
    UseFloquetModuleError
        If ``p.zeta != 0``; the generator is time dependent then.
    SolverFailure
        If the trace-augmented system is singular.
    """
    if p.zeta != 0.0:
        raise UseFloquetModuleError("model is modulated (zeta != 0); use the floquet module")
    L = fock.static_liouvillian(p, dim)
    rho = solve_kernel(L, dim)
    if warn:
        fock.check_cutoff(rho, stacklevel=2)
    return SteadyResult.from_rho(rho)


def _kerr_cubic_roots(delta, chi_eff, F, kappa):
    if F == 0:
        return [0.0]
    if chi_eff == 0:
        return [F**2 / (delta**2 + kappa**2 / 4)]
    coeffs = [chi_eff**2, 2 * delta * chi_eff, delta**2 + kappa**2 / 4, -(F**2)]
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))
    real = sorted(float(r.real) for r in roots if abs(r.imag) <= 1e-7 * scale and r.real >= 0)
    return real


def semiclassical_photon_roots(p: ModelParams) -> list[float]:
    """Real non-negative roots of [kappa^2/4 + (delta + n chi)^2] n - F^2 = 0.

    Ascending; three roots signal bistability.
    """
    return _kerr_cubic_roots(p.delta, p.chi, p.drive_F, p.kappa)


def mean_field_photon_roots(p: ModelParams, delta=None, drive=None) -> list[float]:
    """Coherent-state photon numbers in the sign convention of the Hamiltonian.

    The mean-field equation of H = -delta n + chi a+a+aa + F(a + a+) is
    ``n [(delta - 2 chi n)^2 + kappa^2/4] = F^2``; this is the cubic above
    with ``chi -> -2 chi``.
    """
    delta = p.delta if delta is None else delta
    drive = p.drive_F if drive is None else drive
    return _kerr_cubic_roots(delta, -2.0 * p.chi, drive, p.kappa)


def initial_cutoff(n_estimate: float, floor: int = 8) -> int:
    return max(floor, math.ceil(6 * n_estimate) + 4)


def adapt_cutoff(solve, start: int, max_cutoff: int = 60, rtol: float = 1e-6, stacklevel: int = 2):
    """Grow the Fock cutoff by 50% until the photon number settles.

    ``solve(dim)`` must return an object with ``photon_number`` and a density
    matrix ``rho`` used for the adequacy rule.  The result at the smaller of
    the two agreeing cutoffs is returned; a :class:`CutoffWarning` is raised
    when ``max_cutoff`` is reached first.
    """
    dim = max(2, min(start, max_cutoff))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CutoffWarning)
        current = solve(dim)
        while True:
            nxt_dim = math.ceil(1.5 * dim)
            if nxt_dim > max_cutoff:
                break
            nxt = solve(nxt_dim)
            ref = max(abs(nxt.photon_number), 1e-300)
            top = float(np.real(np.diag(current.rho))[-2:].sum())
            if abs(nxt.photon_number - current.photon_number) <= rtol * ref and top <= fock.ADEQUACY_THRESHOLD:
                return current
            current, dim = nxt, nxt_dim
    warnings.warn(
        f"adaptive cutoff did not converge below max_cutoff={max_cutoff}",
        CutoffWarning,
        stacklevel=stacklevel + 1,
    )
    return current


def steady_state_auto(
    p: ModelParams,
    max_cutoff: int = 60,
    rtol: float = 1e-6,
    start: int | None = None,
) -> SteadyResult:
    """Steady state with the Fock cutoff chosen adaptively.

    Starts at ``max(8, ceil(6 n) + 4)`` for the largest mean-field photon
    number ``n`` and grows by 50% until the photon number moves by less than
    ``rtol`` (relative) and the adequacy rule holds.
    """
    if start is None:
        start = initial_cutoff(max(mean_field_photon_roots(p)))
    return adapt_cutoff(lambda d: steady_state(p, d, warn=False), start, max_cutoff, rtol, stacklevel=3)


def s21_from_field(alpha: complex, F: float, kappa_ext: float) -> complex:
    """Transmission from the intracavity field, S21 = 1 - i kappa_ext alpha / (2F)."""
    if F == 0:
        raise UndefinedTransmissionError("S21 is undefined for zero drive")
    return 1.0 - 1j * kappa_ext * alpha / (2.0 * F)


def s21_notch_linear(delta, kappa_ext, kappa_int, phi=0.0):
    """Linear notch-type transmission with impedance-mismatch angle ``phi``.

    Written in the engineering time convention of resonator fitting, so at
    ``phi = 0`` it is the complex conjugate of :func:`s21_from_field` applied
    to the linear steady state (magnitudes coincide).
    """
    c = np.cos(phi)
    if np.any(np.abs(c) < 1e-15):
        raise DegenerateAsymmetryError("cos(phi) = 0: asymmetry factor diverges")
    delta = np.asarray(delta, dtype=float)
    out = 1.0 - kappa_ext / (kappa_ext + kappa_int + 2j * delta) * np.exp(1j * phi) / c
    return out[()] if out.ndim == 0 else out


def drive_from_power(power_dBm, omega_d, kappa_ext):
    """Drive amplitude F (rad/us) from the power at the sample.

    F = sqrt(P kappa_ext / (hbar omega_d)) with P in watts; the rates come in
    rad/us and are converted to SI for this one formula.
    """
    p_watt = 10.0 ** ((np.asarray(power_dBm, dtype=float) - 30.0) / 10.0)
    F_si = np.sqrt(p_watt * (kappa_ext * 1e6) / (hbar * omega_d * 1e6))
    return F_si / 1e6


def power_from_drive(F, omega_d, kappa_ext):
    """Inverse of :func:`drive_from_power`, in dBm."""
    F_si = np.asarray(F, dtype=float) * 1e6
    p_watt = F_si**2 * hbar * omega_d * 1e6 / (kappa_ext * 1e6)
    return 10.0 * np.log10(p_watt) + 30.0


def qubit_validity_p2(F, kappa, chi):
    """Two-photon population at the two-photon resonance, truncated at |2>.

    <2|rho|2> = 2F^4 / (9F^4 + 2 kappa^2 [2(kappa^2 + chi^2) - 5F^2]),
    approximately F^4 / (2 kappa^2 chi^2) for weak drive.
    """
    den = 9 * F**4 + 2 * kappa**2 * (2 * (kappa**2 + chi**2) - 5 * F**2)
    if den <= 0:
        raise OutOfValidityError("denominator <= 0: drive outside the two-level truncation")
    return 2 * F**4 / den


def is_qubit_regime(F, kappa, chi, margin=10.0) -> bool:
    """F^2 << |chi| kappa, with "<<" meaning a factor ``margin``."""
    return F**2 * margin <= abs(chi) * kappa


def linear_validity_dn(F, kappa, chi):
    """Largest relative photon-number deviation from the linear resonator."""
    if kappa <= 0:
        raise OutOfValidityError("kappa must be > 0")
    return abs(3 * math.sqrt(3) * F**2 * chi / kappa**3)


def is_linear_regime(F, kappa, chi) -> bool:
    return chi == 0 or F < math.sqrt(kappa**3 / abs(chi))


def dip_positions(x, y, prominence=1e-4):
    """Local minima of ``y`` along ``x`` with three-point parabolic refinement."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(-y, prominence=prominence)
    out = []
    for i in idx:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        out.append(x[i] + shift * (x[i + 1] - x[i]))
    return np.array(out)


@dataclass(frozen=True)
class PowerSweep:
    power_dBm: np.ndarray
    delta: np.ndarray
    drive_F: np.ndarray
    photon_number: np.ndarray
    s21: np.ndarray
    cutoff_used: np.ndarray
    results: tuple

    def dips(self, power_index: int, prominence=1e-4) -> np.ndarray:
        return dip_positions(self.delta, np.abs(self.s21[power_index]), prominence)


def _sweep_point(args, dim, max_cutoff):
    p = args
    if dim is None:
        res = steady_state_auto(p, max_cutoff=max_cutoff)
    else:
        res = steady_state(p, dim, warn=False)
    return res


def power_sweep(p, power_grid_dBm, delta_grid, dim=None, jobs=1, max_cutoff=60) -> PowerSweep:
    """Steady states and S21 over a (power, detuning) grid.

    ``dim=None`` selects the cutoff adaptively per point.  Points are
    independent and may be spread over ``jobs`` processes; results keep grid
    order (power major).
    """
    powers = np.atleast_1d(np.asarray(power_grid_dBm, dtype=float))
    deltas = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    if powers.size == 0 or deltas.size == 0:
        raise ValueError("grids must be non-empty")
    Fs = drive_from_power(powers, p.omega_d, p.kappa_ext)
    points = [p.replace(drive_F=float(F), delta=float(d)) for F in Fs for d in deltas]
    results = parallel_map(partial(_sweep_point, dim=dim, max_cutoff=max_cutoff), points, jobs)
    shape = (powers.size, deltas.size)
    n = np.array([r.photon_number for r in results]).reshape(shape)
    alpha = np.array([r.coherence_a for r in results]).reshape(shape)
    s21 = np.array(
        [s21_from_field(a, F, p.kappa_ext) for a, F in zip(alpha.ravel(), np.repeat(Fs, deltas.size))]
    ).reshape(shape)
    cut = np.array([r.cutoff_used for r in results]).reshape(shape)
    return PowerSweep(powers, deltas, Fs, n, s21, cut, tuple(results))
