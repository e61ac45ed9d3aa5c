"""Periodically modulated dynamics.

With H(t) = H_0 + zeta cos(Omega t) n the Liouvillian splits as
``L(t) = L_0 + zeta cos(Omega t) C`` where ``C = -i[n, .]`` is diagonal in the
Fock-pair basis.  Every routine here exploits that structure.

Harmonic balance
    rho(t) = sum_m rho_m exp(i m Omega t) gives
    (L_0 - i m Omega) rho_m + (zeta/2) C (rho_{m-1} + rho_{m+1}) = 0,
    solved by a two-sided block continued fraction.
Floquet map
    The one-period propagator F(T, 0), built as a time-ordered product of
    short-interval exponentials.  Its eigenvalues mu give the Floquet
    Liouvillian spectrum lambda = log(mu) / T.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.integrate import solve_ivp

from . import fock, lindblad
from .effective import bessel_j_orders
from .exceptions import (
    CutoffGuardError,
    IllConditionedBasisError,
    NoSteadyStateError,
    RefineStepsError,
    SolverFailure,
    StiffnessError,
    TruncationWarning,
)
from .params import ModelParams

COND_LIMIT = 1e12
HARMONIC_TOL = 1e-8
BIORTH_TOL = 1e-8


def modulation_diagonal(dim: int) -> np.ndarray:
    """Diagonal of C = -i[n, .] in vec ordering."""
    return fock.commutator_diagonal(np.arange(dim, dtype=float))


def _transpose_perm(dim: int) -> np.ndarray:
    # vec(rho^T) = vec(rho)[perm]
    idx = np.arange(dim * dim).reshape((dim, dim), order="F")
    return idx.T.reshape(-1, order="F")


# --------------------------------------------------------------------------- propagation


def propagate(
    rho0: np.ndarray,
    p: ModelParams,
    t0: float,
    t1: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_eval=None,
    L0: np.ndarray | None = None,
):
    """Integrate the master equation from ``t0`` to ``t1``.

    Adaptive Dormand-Prince 5(4).  Returns the state at ``t1``, or a list of
    states at ``t_eval`` when given.  Outputs are Hermitian-symmetrized.

    Raises
    ------
    StiffnessError
        If the step size underflows; carries the largest generator norm met.
    """
    if not t1 >= t0:
        raise ValueError("t1 must be >= t0")
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    if L0 is None:
        L0 = fock.static_liouvillian(p, dim)
    c = modulation_diagonal(dim)
    zeta, om = p.zeta, p.omega_mod
    if t1 == t0:
        out = 0.5 * (rho0 + rho0.conj().T)
        return out if t_eval is None else [out for _ in t_eval]

    def rhs(t, y):
        dy = L0 @ y
        if zeta:
            dy += (zeta * math.cos(om * t)) * (c * y)
        return dy

    sol = solve_ivp(rhs, (t0, t1), fock.vec(rho0), method="RK45", rtol=rtol, atol=atol, t_eval=t_eval)
    if sol.status != 0:
        gnorm = np.linalg.norm(L0, 2) + abs(zeta) * np.max(np.abs(c))
        raise StiffnessError(f"integration failed: {sol.message}", max_generator_norm=gnorm)
    states = [fock.unvec(y, dim) for y in sol.y.T]
    states = [0.5 * (r + r.conj().T) for r in states]
    return states[-1] if t_eval is None else states


def period_average(rho_start: np.ndarray, p: ModelParams, t0: float = 0.0, rtol=1e-10, atol=1e-12):
    """Time average of rho(t) over one modulation period starting at ``t0``.

    The integral is carried as extra ODE components, so no quadrature grid
    is involved.
    """
    rho_start = np.asarray(rho_start, dtype=complex)
    dim = rho_start.shape[0]
    L0 = fock.static_liouvillian(p, dim)
    c = modulation_diagonal(dim)
    n = dim * dim
    T = p.period

    def rhs(t, y):
        x = y[:n]
        dx = L0 @ x + (p.zeta * math.cos(p.omega_mod * t)) * (c * x)
        return np.concatenate([dx, x])

    y0 = np.concatenate([fock.vec(rho_start), np.zeros(n, dtype=complex)])
    sol = solve_ivp(rhs, (t0, t0 + T), y0, method="RK45", rtol=rtol, atol=atol)
    if sol.status != 0:
        raise StiffnessError(f"integration failed: {sol.message}")
    avg = fock.unvec(sol.y[n:, -1] / T, dim)
    return 0.5 * (avg + avg.conj().T)


# --------------------------------------------------------------------------- harmonic balance


@dataclass(frozen=True)
class HarmonicState:
    """Fourier components rho_m, m = -M..M, of the periodic steady state."""

    components: np.ndarray  # shape (2M+1, dim, dim), index m + M
    M: int
    omega_mod: float
    drive_F: float = 0.0
    kappa_ext: float = 0.0

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    @property
    def rho0(self) -> np.ndarray:
        return self.components[self.M]

    # alias so adaptive cutoff and adequacy checks can treat it like SteadyResult
    @property
    def rho(self) -> np.ndarray:
        return self.rho0

    @property
    def photon_number(self) -> float:
        return fock.photon_number(self.rho0)

    def component(self, m: int) -> np.ndarray:
        if abs(m) > self.M:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.components[m + self.M]

    def at_time(self, t: float) -> np.ndarray:
        """rho(t) = sum_m rho_m exp(i m Omega t)."""
        m = np.arange(-self.M, self.M + 1)
        ph = np.exp(1j * m * self.omega_mod * t)
        return np.tensordot(ph, self.components, axes=1)

    def boundary_ratio(self) -> float:
        n0 = np.linalg.norm(self.rho0)
        return max(np.linalg.norm(self.components[0]), np.linalg.norm(self.components[-1])) / n0


def default_harmonics(p: ModelParams) -> int:
    if p.zeta == 0:
        return 1
    return math.ceil(3 * abs(p.zeta) / p.omega_mod) + 8


def _harmonic_solve(L0, c, zeta, omega_mod, dim, M):
    n = dim * dim
    b = 0.5 * zeta * c  # diagonal of the coupling block
    eye_diag = np.arange(n), np.arange(n)
    # S_m maps rho_{m-1} -> rho_m for m = 1..M
    S = [None] * (M + 1)
    nxt = None
    for m in range(M, 0, -1):
        A = L0.copy()
        A[eye_diag] -= 1j * m * omega_mod
        if nxt is not None:
            A += b[:, None] * nxt
        S[m] = -la.solve(A, np.diag(b), check_finite=False)
        nxt = S[m]
    # negative side by the symmetry rho_{-m} = rho_m^dagger
    perm = _transpose_perm(dim)
    T1 = np.conj(S[1][np.ix_(perm, perm)])
    A0 = L0 + b[:, None] * (S[1] + T1)
    rho0 = lindblad.solve_kernel(A0, dim)
    comps = np.zeros((2 * M + 1, dim, dim), dtype=complex)
    comps[M] = rho0
    x = fock.vec(rho0)
    for m in range(1, M + 1):
        x = S[m] @ x
        r = fock.unvec(x, dim)
        comps[M + m] = r
        comps[M - m] = r.conj().T
    return comps


def harmonic_steady_state(
    p: ModelParams,
    dim: int,
    M: int | None = None,
    adapt: bool = True,
    max_M: int = 400,
    warn: bool = True,
) -> HarmonicState:
    """Period-resolved stationary state by harmonic balance.

    Parameters
    ----------
    p : ModelParams
    dim : int
        Fock cutoff.
    M : int, optional
        Harmonic cutoff; default ``ceil(3 zeta / Omega) + 8``.
    adapt : bool
        Double ``M`` until ``||rho_{+-M}|| <= 1e-8 ||rho_0||``.

    Notes
    -----
    The block-tridiagonal system is eliminated from both ends towards m = 0
    (a matrix continued fraction, i.e. the block Thomas sweep); the centre
    block gets the trace constraint.  The m < 0 side follows from
    rho_{-m} = rho_m^dagger and is never solved separately.
    """
    fock._check_dim(dim)
    if p.zeta != 0 and p.omega_mod <= 0:
        raise ValueError("omega_mod must be > 0")
    L0 = fock.static_liouvillian(p, dim)
    if p.zeta == 0:
        rho = lindblad.solve_kernel(L0, dim)
        comps = np.zeros((3, dim, dim), dtype=complex)
        comps[1] = rho
        h = HarmonicState(comps, 1, p.omega_mod, p.drive_F, p.kappa_ext)
        if warn:
            fock.check_cutoff(rho, stacklevel=2)
        return h
    if M is None:
        M = default_harmonics(p)
    if M < 1:
        raise ValueError("M must be >= 1")
    c = modulation_diagonal(dim)
    while True:
        try:
            comps = _harmonic_solve(L0, c, p.zeta, p.omega_mod, dim, M)
        except la.LinAlgError as exc:
            raise SolverFailure(f"singular block in harmonic sweep at M={M}: {exc}") from exc
        h = HarmonicState(comps, M, p.omega_mod, p.drive_F, p.kappa_ext)
        ratio = h.boundary_ratio()
        if ratio <= HARMONIC_TOL or not adapt:
            break
        if 2 * M > max_M:
            break
        M *= 2
    if ratio > HARMONIC_TOL:
        warnings.warn(
            f"boundary harmonics carry {ratio:.2e} of ||rho_0|| at M={M}; increase M",
            TruncationWarning,
            stacklevel=2,
        )
    if warn:
        fock.check_cutoff(h.rho0, stacklevel=2)
    return h


def time_averaged_observables(h: HarmonicState):
    """(photon number, <a>, S21) of the period-averaged state rho_0."""
    n = fock.photon_number(h.rho0)
    a = fock.coherence(h.rho0)
    s21 = lindblad.s21_from_field(a, h.drive_F, h.kappa_ext) if h.drive_F != 0 else complex(1.0)
    return n, a, s21


def estimate_photon_number(p: ModelParams) -> float:
    """Largest mean-field photon number over the Bessel sidebands."""
    if p.zeta == 0 or p.omega_mod <= 0:
        return max(lindblad.mean_field_photon_roots(p))
    ratio = abs(p.zeta) / p.omega_mod
    kmax = int(ratio + 10 + 3 * ratio ** (1 / 3))
    ks = np.arange(-kmax, kmax + 1)
    J = bessel_j_orders(ks, ratio)
    best = 0.0
    for k, j in zip(ks, J):
        roots = lindblad.mean_field_photon_roots(p, delta=p.delta - k * p.omega_mod, drive=p.drive_F * j)
        best = max(best, max(roots))
    return best


def harmonic_steady_state_auto(p: ModelParams, max_cutoff: int = 60, rtol: float = 1e-6, M=None) -> HarmonicState:
    """Harmonic balance with an adaptively chosen Fock cutoff."""
    start = lindblad.initial_cutoff(estimate_photon_number(p))
    return lindblad.adapt_cutoff(
        lambda d: harmonic_steady_state(p, d, M=M, warn=False), start, max_cutoff, rtol, stacklevel=3
    )


# --------------------------------------------------------------------------- Floquet map


@dataclass(frozen=True)
class FloquetMap:
    entries: np.ndarray
    dim: int
    period: float
    steps: int
    method: str
    step_error: float = float("nan")
    omega_mod: float = 0.0

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return fock.unvec(self.entries @ fock.vec(rho), self.dim)


def estimate_map_seconds(dim: int, steps: int = 64, method: str = "split") -> float:
    """Rough single-core cost of one Floquet-map build plus its eigendecomposition."""
    n = dim * dim
    matmul = 2.5e-10 * n**3
    expm_cost = 10 * matmul
    build = 3 * steps * matmul + 3 * expm_cost if method == "split" else 3 * steps * (expm_cost + matmul)
    return build + 15 * matmul


def _midpoint_product(L0, c, p, steps):
    T = p.period
    dt = T / steps
    n = L0.shape[0]
    out = np.eye(n, dtype=complex)
    cache = {}
    for k in range(steps):
        # cos is symmetric about T/2, so steps k and N-1-k share a generator
        key = min(k, steps - 1 - k)
        E = cache.pop(key, None)
        if E is None:
            G = L0.copy()
            G[np.diag_indices(n)] += p.zeta * math.cos(p.omega_mod * (key + 0.5) * dt) * c
            E = la.expm(G * dt)
            if key != steps - 1 - key:
                cache[key] = E
        out = E @ out
    return out


def _split_product(L0, c, p, steps):
    # Strang splitting: the modulation part is diagonal and integrated exactly.
    T = p.period
    dt = T / steps
    E = la.expm(L0 * dt)
    Eh = la.expm(L0 * (dt / 2))
    out = Eh.copy()
    om = p.omega_mod
    r = p.zeta / om if p.zeta else 0.0
    for k in range(steps):
        t0, t1 = k * dt, (k + 1) * dt
        theta = r * (math.sin(om * t1) - math.sin(om * t0))
        out = np.exp(theta * c)[:, None] * out
        out = (Eh if k == steps - 1 else E) @ out
    return out


def floquet_map(
    p: ModelParams,
    dim: int,
    steps_per_period: int = 64,
    method: str = "midpoint",
    tol: float = 1e-7,
    max_steps: int = 1 << 14,
    refine: bool = True,
    max_cutoff: int | None = None,
    force: bool = False,
    extrapolate: bool = False,
) -> FloquetMap:
    """One-period evolution superoperator F(T, 0).

    Parameters
    ----------
    method : {"midpoint", "split"}
        ``midpoint`` multiplies exp(L(t_k + dt/2) dt) in time order (second
        order Magnus).  ``split`` is a second-order Strang splitting in which
        the static part uses one cached exponential and the diagonal
        modulation part is integrated exactly; it needs a single matrix
        exponential per refinement level.
    tol : float
        Step doubling stops once ``||F_N - F_2N||_inf < tol``.
    extrapolate : bool
        Return the Richardson combination (4 F_2N - F_N) / 3, fourth order
        and still trace preserving; convergence is then judged on successive
        extrapolants.
    max_cutoff : int, optional
        Cost guard; larger ``dim`` raises :class:`CutoffGuardError` unless
        ``force``.

    Raises
    ------
    RefineStepsError
        If ``max_steps`` is reached before convergence.
    """
    fock._check_dim(dim)
    if steps_per_period < 16:
        raise ValueError("steps_per_period must be >= 16")
    if p.omega_mod <= 0:
        raise ValueError("omega_mod must be > 0 for a Floquet map")
    if max_cutoff is not None and dim > max_cutoff and not force:
        est = estimate_map_seconds(dim, steps_per_period, method)
        raise CutoffGuardError(
            f"cutoff {dim} exceeds guard {max_cutoff}; estimated cost ~{est:.0f} s per map "
            f"(superoperator {dim * dim}x{dim * dim}); pass force to override"
        )
    if method not in ("midpoint", "split"):
        raise ValueError("method must be 'midpoint' or 'split'")
    L0 = fock.static_liouvillian(p, dim)
    c = modulation_diagonal(dim)
    build = _midpoint_product if method == "midpoint" else _split_product
    steps = steps_per_period
    raw = build(L0, c, p, steps)
    current = raw
    err = float("nan")
    if refine:
        while True:
            if 2 * steps > max_steps:
                raise RefineStepsError(
                    f"Floquet map not converged to {tol:g} with {steps} steps (last change {err:.2e})"
                )
            raw_next = build(L0, c, p, 2 * steps)
            # both schemes are symmetric, so the error series is even in dt
            nxt = (4 * raw_next - raw) / 3 if extrapolate else raw_next
            if extrapolate and steps == steps_per_period:
                current, raw, steps = nxt, raw_next, 2 * steps
                continue
            err = float(np.linalg.norm(nxt - current, np.inf))
            current, raw, steps = nxt, raw_next, 2 * steps
            if err < tol:
                break
    return FloquetMap(current, dim, p.period, steps, method, err, p.omega_mod)


# --------------------------------------------------------------------------- Floquet spectrum


@dataclass(frozen=True)
class FloquetSpectrum:
    """Eigen-decomposition of the Floquet Liouvillian L_F = log(F) / T.

    ``eigenvalues`` holds every lambda_j.  Eigenvectors are stored for the
    indices in ``vector_index`` only: ``right_eigvecs[:, i]`` is eta_j and
    ``left_eigvecs[:, i]`` is sigma_j for ``j = vector_index[i]``, normalized
    so that ``left^H right = I``.  The steady-state eigenvector has unit
    trace, which makes its dual the trace functional; other right
    eigenvectors have unit Frobenius norm.

    Multipliers with ``|mu| <= mu_floor`` are below the round-off level of a
    one-period map and flagged in ``resolved``; their lambda carry no
    information.
    """

    eigenvalues: np.ndarray
    multipliers: np.ndarray
    right_eigvecs: np.ndarray
    left_eigvecs: np.ndarray
    vector_index: np.ndarray
    resolved: np.ndarray
    period: float
    steady_index: int
    condition: float
    basis: str = "full"
    branch: str = "principal: Im(lambda T) in (-pi, pi]"
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(round(math.sqrt(self.right_eigvecs.shape[0])))

    @property
    def resolved_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.resolved]

    @property
    def vector_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.vector_index]

    @property
    def steady_state(self) -> np.ndarray:
        col = int(np.flatnonzero(self.vector_index == self.steady_index)[0])
        rho = fock.unvec(self.right_eigvecs[:, col], self.dim)
        rho = rho / np.trace(rho)
        return 0.5 * (rho + rho.conj().T)

    def biorthonormality_residual(self) -> float:
        G = self.left_eigvecs.conj().T @ self.right_eigvecs
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def _normalize_pairs(V, Wh, steady_col, dim):
    """Unit-norm right vectors (unit trace for the steady one), duals rescaled."""
    scale = np.linalg.norm(V, axis=0).astype(complex)
    tr = np.trace(fock.unvec(V[:, steady_col], dim))
    if abs(tr) < 1e-14:
        raise NoSteadyStateError("steady eigenvector has zero trace")
    scale[steady_col] = tr
    return V / scale, Wh * scale[:, None]


def _resolved_block(F, mu_floor, dim, k_steady_mu):
    """Biorthonormal eigenvectors of the multipliers above ``mu_floor``.

    A reordered Schur form puts the resolved multipliers in T11; the
    Sylvester solve T11 X - X T22 = -T12 decouples them from the rest, and
    T11 = Y diag(mu) Y^-1 gives right vectors Q1 Y and duals
    Y^-1 (Q1^H - X Q2^H).
    """
    Tm, Q, k = la.schur(F, output="complex", sort=lambda z: abs(z) > mu_floor)
    T11, T12, T22 = Tm[:k, :k], Tm[:k, k:], Tm[k:, k:]
    Q1, Q2 = Q[:, :k], Q[:, k:]
    X = la.solve_sylvester(T11, -T22, -T12) if k < Tm.shape[0] else np.zeros((k, 0))
    mu, Y = la.eig(T11)
    V = Q1 @ Y
    Wh = np.linalg.solve(Y, Q1.conj().T - X @ Q2.conj().T)
    cond = float(np.linalg.cond(Y))
    s = int(np.argmin(np.abs(mu - k_steady_mu)))
    V, Wh = _normalize_pairs(V, Wh, s, dim)
    return mu, V, Wh, cond, np.diag(T22)


def floquet_liouvillian(
    fmap: FloquetMap,
    steady_tol: float = 1e-6,
    mu_floor: float | None = None,
    fallback_tol: float = 1e-6,
) -> FloquetSpectrum:
    """Spectrum and biorthonormal eigenbasis of the Floquet Liouvillian.

    The full eigenbasis is used when its condition number is at most 1e12
    and the biorthonormality residual is within ``BIORTH_TOL``.  Otherwise
    the Schur fallback keeps eigenvectors for the multipliers with
    ``|mu| > mu_floor`` only.  Multipliers far below one are lost to
    round-off in a one-period map (lambda = log(mu) / T is then noise) and
    their near-null cluster is what spoils the conditioning.

    With ``mu_floor=None`` the floor is the smallest power of ten in
    [1e-12, 1e-2] whose resolved block meets ``fallback_tol``.

    Raises
    ------
    NoSteadyStateError
        No multiplier within ``steady_tol`` of 1.
    IllConditionedBasisError
        No floor gives a reliable resolved block.
    """
    dim = fmap.dim
    mu, V = la.eig(fmap.entries)
    k = int(np.argmin(np.abs(mu - 1.0)))
    if abs(mu[k] - 1.0) > steady_tol:
        raise NoSteadyStateError(
            f"no Floquet multiplier within {steady_tol:g} of 1 (closest {mu[k]:.6g}); "
            "trace preservation is broken"
        )
    V = V / np.linalg.norm(V, axis=0)
    cond = float(np.linalg.cond(V))
    full_ok = False
    if cond <= COND_LIMIT:
        Wh = np.linalg.inv(V)
        V_n, Wh_n = _normalize_pairs(V, Wh, k, dim)
        resid = np.max(np.abs(Wh_n @ V_n - np.eye(V.shape[1])))
        full_ok = resid <= BIORTH_TOL
    floor_used = 0.0
    if full_ok:
        V, Wh = V_n, Wh_n
        vector_index = np.arange(mu.size)
        basis = "full"
    else:
        exps = [int(np.log10(mu_floor))] if mu_floor is not None else list(range(-12, -1))
        lo, hi = 0, len(exps) - 1
        best = None
        # bisection over decades: residual falls as the floor rises
        while lo <= hi:
            mid = (lo + hi) // 2
            fl = mu_floor if mu_floor is not None else 10.0 ** exps[mid]
            mu_r, Vr, Whr, cond_r, mu_rest = _resolved_block(fmap.entries, fl, dim, 1.0)
            resid = np.max(np.abs(Whr @ Vr - np.eye(Vr.shape[1])))
            if resid <= fallback_tol and cond_r <= COND_LIMIT:
                best = (fl, mu_r, Vr, Whr, cond_r, mu_rest)
                hi = mid - 1
            else:
                lo = mid + 1
        if best is None:
            raise IllConditionedBasisError(
                f"no resolution floor gives a biorthonormal basis within {fallback_tol:g}", condition=cond
            )
        floor_used, mu_r, V, Wh, cond, mu_rest = best
        # resolved multipliers first (with vectors), the rest after
        mu = np.concatenate([mu_r, mu_rest])
        vector_index = np.arange(mu_r.size)
        k = int(np.argmin(np.abs(mu_r - 1.0)))
        basis = "schur-resolved"
    floor = floor_used if basis != "full" else (mu_floor if mu_floor is not None else 1e-8)
    with np.errstate(divide="ignore"):
        lam = np.log(mu) / fmap.period
    return FloquetSpectrum(
        eigenvalues=lam,
        multipliers=mu,
        right_eigvecs=V,
        left_eigvecs=Wh.conj().T,
        vector_index=np.asarray(vector_index),
        resolved=np.abs(mu) > floor,
        period=fmap.period,
        steady_index=k,
        condition=cond,
        basis=basis,
        meta={"steps": fmap.steps, "method": fmap.method, "step_error": fmap.step_error, "mu_floor": floor},
    )


def fold_eigenvalues(lam, omega_mod: float) -> np.ndarray:
    """Fold Im(lambda) into (-Omega/2, Omega/2], the strip of the principal log."""
    lam = np.asarray(lam, dtype=complex)
    im = lam.imag
    folded = im - omega_mod * np.ceil((im - omega_mod / 2) / omega_mod)
    return lam.real + 1j * folded


def stroboscopic_state(p: ModelParams, dim: int, **map_kwargs) -> np.ndarray:
    """Fixed point of the Floquet map (the state at t = 0 mod T)."""
    spec = floquet_liouvillian(floquet_map(p, dim, **map_kwargs))
    return spec.steady_state


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.asarray(a) - np.asarray(b)
    d = 0.5 * (d + d.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(d))))
