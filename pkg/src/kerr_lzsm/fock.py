"""Truncated Fock-space operators, superoperators and state observables.

Vectorization is column stacking, ``vec(rho) = rho.reshape(-1, order="F")``,
so that ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``.  Every superoperator
in the package acts on vectors produced by :func:`vec`.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .exceptions import CutoffWarning, InvalidDimensionError, InvalidRateError

ADEQUACY_THRESHOLD = 1e-6


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock cutoff must be an integer >= 2, got {dim!r}")
    return int(dim)


def destroy(dim: int) -> np.ndarray:
    """Annihilation operator with ``a[n-1, n] = sqrt(n)``."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def create(dim: int) -> np.ndarray:
    return destroy(dim).conj().T


def number(dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def basis(dim: int, n: int) -> np.ndarray:
    """Projector |n><n| as a density matrix."""
    dim = _check_dim(dim)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def coherent_dm(dim: int, alpha: complex) -> np.ndarray:
    """Coherent-state projector built from exact Poisson amplitudes, renormalized."""
    dim = _check_dim(dim)
    n = np.arange(dim)
    log_amp = -0.5 * abs(alpha) ** 2 - 0.5 * gammaln(n + 1)
    psi = np.exp(log_amp) * np.power(complex(alpha), n)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def vec(op: np.ndarray) -> np.ndarray:
    return np.asarray(op).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape((dim, dim), order="F")


def spre(A: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho."""
    return np.kron(np.eye(A.shape[0]), A)


def spost(B: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho B."""
    return np.kron(B.T, np.eye(B.shape[0]))


def sprepost(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho B."""
    return np.kron(B.T, A)


def commutator_diagonal(diag: np.ndarray) -> np.ndarray:
    """Diagonal of the superoperator ``-i[D, .]`` for a diagonal operator D.

    Returned as a 1-D array of length dim**2 in vec ordering.
    """
    diag = np.asarray(diag)
    # vec index i + j*dim holds |i><j|, scaled by -i (d_i - d_j)
    return (-1j * (diag[:, None] - diag[None, :])).reshape(-1, order="F")


def static_hamiltonian(p, dim: int) -> np.ndarray:
    """Time-independent part of H: detuning, Kerr, quintic term and drive."""
    dim = _check_dim(dim)
    n = np.arange(dim, dtype=float)
    diag = -p.delta * n + p.chi * n * (n - 1) + p.chi5 * n * (n - 1) * (n - 2)
    a = destroy(dim)
    return np.diag(diag).astype(complex) + p.drive_F * (a + a.conj().T)


def hamiltonian(p, dim: int, t: float = 0.0) -> np.ndarray:
    """Full Hamiltonian (units of hbar) at time ``t``.

    H = -delta n + chi a+a+aa + chi5 a+^3 a^3 + F (a + a+) + zeta cos(omega_mod t) n
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    H = static_hamiltonian(p, dim)
    if p.zeta != 0.0:
        H = H + p.zeta * np.cos(p.omega_mod * t) * number(dim)
    return H


def dissipator(L: np.ndarray) -> np.ndarray:
    """Superoperator of D[L] rho = L rho L+ - {L+L, rho}/2."""
    LdL = L.conj().T @ L
    return sprepost(L, L.conj().T) - 0.5 * spre(LdL) - 0.5 * spost(LdL)


def liouvillian(H: np.ndarray, jumps=()) -> np.ndarray:
    """Dense Lindblad generator for Hamiltonian ``H`` and ``(operator, rate)`` jumps."""
    H = np.asarray(H, dtype=complex)
    L = -1j * (spre(H) - spost(H))
    for op, rate in jumps:
        if rate < 0:
            raise InvalidRateError(f"jump rate must be >= 0, got {rate}")
        if rate == 0:
            continue
        L = L + rate * dissipator(np.asarray(op, dtype=complex))
    return L


def model_jumps(p, dim: int):
    """Jump set of the resonator: photon loss and pure dephasing."""
    return [(destroy(dim), p.kappa), (number(dim), p.kappa_phi)]


def static_liouvillian(p, dim: int) -> np.ndarray:
    """Liouvillian with the modulation switched off (the zeta-independent part)."""
    return liouvillian(static_hamiltonian(p, dim), model_jumps(p, dim))


def model_liouvillian(p, dim: int, t: float = 0.0) -> np.ndarray:
    return liouvillian(hamiltonian(p, dim, t), model_jumps(p, dim))


def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def photon_number(rho: np.ndarray) -> float:
    return float(np.real(np.arange(rho.shape[0]) @ np.diag(rho)))


def coherence(rho: np.ndarray) -> complex:
    """<a> = Tr(rho a) = sum_n sqrt(n) rho[n, n-1]."""
    d = rho.shape[0]
    return complex(np.sum(np.sqrt(np.arange(1, d)) * np.diagonal(rho, -1)))


def purity(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.vdot(rho.conj().T, rho)))


def check_cutoff(rho: np.ndarray, threshold: float = ADEQUACY_THRESHOLD, stacklevel: int = 2) -> bool:
    """Warn when the top two Fock levels carry more than ``threshold`` population."""
    pops = np.real(np.diag(rho))
    top = float(pops[-2:].sum())
    if top > threshold:
        warnings.warn(
            f"population {top:.3g} in the two highest Fock levels exceeds {threshold:g}; "
            f"increase the cutoff (currently {rho.shape[0]})",
            CutoffWarning,
            stacklevel=stacklevel + 1,
        )
        return False
    return True


def displacement_elements(beta, dim: int) -> np.ndarray:
    """Exact matrix elements <m|D(beta)|n> for m, n < dim.

    ``beta`` may be an array; the result has shape ``beta.shape + (dim, dim)``.
    Uses the associated-Laguerre closed form, so no Fock truncation enters the
    elements themselves.
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    out = np.zeros(beta.shape + (dim, dim), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_abs = np.log(np.abs(beta))
    phase = np.angle(beta)
    for n in range(dim):
        for m in range(n, dim):
            k = m - n
            lag = eval_genlaguerre(n, k, x)
            if k == 0:
                mag = np.exp(-x / 2)
            else:
                mag = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)) + k * log_abs - x / 2)
                mag = np.where(x == 0, 0.0, mag)
            val = mag * lag * np.exp(1j * k * phase)
            out[..., m, n] = val
            if k:
                # <n|D|m> = conj(<m|D(-beta)|n>) with (-1)^k from beta -> -beta
                out[..., n, m] = (-1) ** k * np.conj(val)
    return out


def wigner(rho: np.ndarray, xvec, yvec=None, warn: bool = True) -> np.ndarray:
    """Wigner function W(alpha) = 2/pi Tr[D_alpha P D_alpha^+ rho] on a grid.

    Parameters
    ----------
    rho : ndarray (dim, dim)
        Density matrix.
    xvec, yvec : 1-D arrays
        Real and imaginary parts of alpha.  ``yvec`` defaults to ``xvec``.

    Returns
    -------
    W : ndarray (len(yvec), len(xvec))
        ``W[i, j]`` is evaluated at ``alpha = xvec[j] + 1j * yvec[i]``.

    Notes
    -----
    The displaced parity obeys ``D_a P D_a^+ = D_{2a} P``, and the elements of
    ``D_{2a}`` are evaluated in closed form, so the grid may extend beyond the
    support of ``rho`` without truncation error.  A :class:`CutoffWarning` is
    still raised when the displaced state's mean photon number reaches the
    cutoff, or when ``rho`` itself fails the adequacy rule.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    xvec = np.asarray(xvec, dtype=float)
    yvec = xvec if yvec is None else np.asarray(yvec, dtype=float)
    if not (np.all(np.isfinite(xvec)) and np.all(np.isfinite(yvec))):
        raise ValueError("grid must be finite")
    alpha = xvec[None, :] + 1j * yvec[:, None]
    if warn:
        check_cutoff(rho, stacklevel=2)
        n_mean = photon_number(rho)
        a_mean = coherence(rho)
        displaced_n = n_mean - 2 * np.real(np.conj(alpha) * a_mean) + np.abs(alpha) ** 2
        if np.max(displaced_n) > dim - 1:
            warnings.warn(
                f"grid reaches displaced photon number {np.max(displaced_n):.1f} "
                f">= cutoff {dim}; the state is not resolved there",
                CutoffWarning,
                stacklevel=2,
            )
    D2 = displacement_elements(2 * alpha, dim)
    parity = (-1.0) ** np.arange(dim)
    # sum_{m,n} D2[m,n] (-1)^n rho[n,m]
    W = np.einsum("...mn,n,nm->...", D2, parity, rho)
    return (2 / np.pi) * np.real(W)
