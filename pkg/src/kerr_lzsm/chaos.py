"""Level statistics of non-Hermitian spectra.

Spacings, unfolding, complex spacing ratios, the analytic 2D Poisson and
Ginibre spacing laws, random-matrix samplers, and the spectral-weight
selection of eigenvalues relevant to a given steady state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.special import gammaincc, gammaln

from . import fock
from .exceptions import (
    DomainError,
    EmptyDecompositionError,
    InsufficientDataError,
    UnreliableBasisError,
)

GINIBRE_R = 0.74
GINIBRE_MINUS_COS = 0.24
POISSON_R = 0.66
POISSON_MINUS_COS = 0.0
MIN_SELECTED = 100


@dataclass(frozen=True)
class SpectrumSample:
    eigenvalues: np.ndarray
    source: str = "external-file"

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex).ravel()
        if not np.all(np.isfinite(ev)):
            raise ValueError("eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self):
        return self.eigenvalues.size


def _as_points(s) -> np.ndarray:
    ev = s.eigenvalues if isinstance(s, SpectrumSample) else np.asarray(s, dtype=complex).ravel()
    return np.column_stack([ev.real, ev.imag])


def _neighbours(pts: np.ndarray, k: int):
    """Indices and distances of the k nearest other points, ties by index."""
    n = len(pts)
    kq = min(n, k + 3)
    dist, idx = cKDTree(pts).query(pts, k=kq)
    out_i = np.empty((n, k), dtype=int)
    out_d = np.empty((n, k))
    for j in range(n):
        keep = idx[j] != j
        d, i = dist[j][keep], idx[j][keep]
        order = np.lexsort((i, d))[:k]
        out_i[j], out_d[j] = i[order], d[order]
    return out_i, out_d


def nn_spacings(s) -> np.ndarray:
    """Distance from each eigenvalue to its nearest neighbour (other index)."""
    pts = _as_points(s)
    if len(pts) < 2:
        raise InsufficientDataError("need at least 2 eigenvalues")
    dist, _ = cKDTree(pts).query(pts, k=2)
    # with exact duplicates the first hit may be the twin instead of self
    return np.where(dist[:, 0] > 0, dist[:, 0], dist[:, 1])


def edge_mask(s, k_local: int = 30) -> np.ndarray:
    """True for eigenvalues whose k_local-neighbourhood reaches the convex hull.

    The neighbourhood radius is the distance to the k_local-th nearest
    eigenvalue; the boundary distance is measured to the nearest hull facet.
    Collinear spectra use the two end points of the segment instead.
    """
    pts = _as_points(s)
    n = len(pts)
    k = min(k_local, n - 1)
    dist, _ = cKDTree(pts).query(pts, k=k + 1)
    radius = dist[:, -1]
    centred = pts - pts.mean(axis=0)
    try:
        if np.linalg.matrix_rank(centred, tol=1e-12 * max(1.0, np.abs(centred).max())) < 2:
            raise QhullError("degenerate")
        hull = ConvexHull(pts)
        boundary = np.min(-(pts @ hull.equations[:, :2].T + hull.equations[:, 2]), axis=1)
    except QhullError:
        _, _, vt = np.linalg.svd(centred, full_matrices=False)
        x = centred @ vt[0]
        boundary = np.minimum(x - x.min(), x.max() - x)
    return boundary < radius


def unfold_with_mask(s, k_local: int = 30):
    """Locally normalized spacings for every eigenvalue plus the edge mask.

    Each raw spacing is divided by the mean raw spacing of its k_local
    nearest eigenvalues (itself included); the bulk values are then scaled to
    unit mean.
    """
    pts = _as_points(s)
    if k_local < 5:
        raise ValueError("k_local must be >= 5")
    if len(pts) <= 2 * k_local:
        raise InsufficientDataError(f"need more than {2 * k_local} eigenvalues for k_local={k_local}")
    raw = nn_spacings(s)
    _, idx = cKDTree(pts).query(pts, k=k_local)
    local = raw[idx].mean(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(local > 0, raw / local, 0.0)
    edge = edge_mask(s, k_local)
    bulk = ~edge
    if not np.any(bulk):
        raise InsufficientDataError("every eigenvalue is within the edge band")
    mean = u[bulk].mean()
    if mean > 0:
        u = u / mean
    return u, edge


def unfold(s, k_local: int = 30) -> np.ndarray:
    """Unit-mean unfolded spacings of the bulk eigenvalues."""
    u, edge = unfold_with_mask(s, k_local)
    bulk = u[~edge]
    return bulk / bulk.mean() if bulk.mean() > 0 else bulk


def poisson2d_pdf(s):
    """2D Poisson spacing law (pi/2) s exp(-pi s^2 / 4), unit mean."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("spacing must be >= 0")
    out = 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)
    return out[()] if out.ndim == 0 else out


def poisson2d_cdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, 1.0 - np.exp(-0.25 * np.pi * np.maximum(s, 0) ** 2), 0.0)


def _ginibre_raw(s: np.ndarray, k_min: int = 100, tol: float = 1e-12) -> np.ndarray:
    """prod_k Q(1+k, s^2) * sum_j 2 s^(2j+1) e^(-s^2) / Gamma(1+j, s^2).

    Q is the regularized upper incomplete gamma, so Gamma(1+k, x)/k! = Q(1+k, x)
    and the unregularized Gamma(1+j, x) = j! Q(1+j, x).  Both series stop once
    Q(1+k, s^2) > 1 - tol for every s and k >= k_min.
    """
    s = np.asarray(s, dtype=float)
    x = s * s
    log_prod = np.zeros_like(s)
    total = np.zeros_like(s)
    pos = s > 0
    logs = np.log(np.where(pos, s, 1.0))
    k = 1
    while True:
        q = gammaincc(k + 1, x)
        log_prod += np.log(q)
        with np.errstate(divide="ignore", over="ignore"):
            log_term = np.log(2.0) + (2 * k + 1) * logs - x - gammaln(k + 1) - np.log(q)
        total += np.where(pos, np.exp(log_term), 0.0)
        if k >= k_min and np.all(q > 1 - tol):
            break
        k += 1
    return np.exp(log_prod) * total


@lru_cache(maxsize=1)
def _ginibre_table():
    s = np.arange(0.0, 8.0 + 5e-5, 1e-4)
    raw = _ginibre_raw(s)
    norm = np.trapezoid(raw, s)
    mean = np.trapezoid(s * raw, s) / norm
    # p_unit(s) = (mean / norm) p_raw(mean s): unit norm and unit mean
    su = s / mean
    pu = raw * mean / norm
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pu[1:] + pu[:-1]) * np.diff(su))])
    return mean, norm, su, pu, cdf


def ginibre_pdf(s, rescale: bool = True):
    """Nearest-neighbour spacing law of the complex Ginibre ensemble.

    With ``rescale`` (default) the law is rescaled to unit mean spacing, the
    normalization used for unfolded data.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("spacing must be >= 0")
    if not rescale:
        out = _ginibre_raw(np.atleast_1d(s)).reshape(s.shape)
    else:
        mean, norm, *_ = _ginibre_table()
        out = _ginibre_raw(np.atleast_1d(s * mean)).reshape(s.shape) * mean / norm
    return out[()] if out.ndim == 0 else out


def ginibre_cdf(s):
    """CDF of the unit-mean Ginibre spacing law (tabulated, linear interpolation)."""
    _, _, su, _, cdf = _ginibre_table()
    s = np.asarray(s, dtype=float)
    return np.interp(s, su, cdf, left=0.0, right=1.0)


@dataclass(frozen=True)
class RatioStats:
    z: np.ndarray
    index: np.ndarray
    r_mean: float
    cos_theta_mean: float
    degenerate: int
    count: int


def complex_spacing_ratio(s, mask=None) -> RatioStats:
    """Complex spacing ratios z_j = (l_NN - l_j) / (l_NNN - l_j).

    Neighbour ties are broken by index.  Eigenvalues with an exact duplicate
    are excluded and counted in ``degenerate``.  ``mask`` (True = keep)
    restricts which z_j enter the means, not which points are neighbours.
    """
    ev = s.eigenvalues if isinstance(s, SpectrumSample) else np.asarray(s, dtype=complex).ravel()
    if ev.size < 3:
        raise InsufficientDataError("need at least 3 eigenvalues")
    idx, dist = _neighbours(_as_points(ev), 2)
    degenerate = dist[:, 0] == 0
    keep = ~degenerate if mask is None else (~degenerate & np.asarray(mask, dtype=bool))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (ev[idx[:, 0]] - ev) / (ev[idx[:, 1]] - ev)
    sel = np.flatnonzero(keep)
    zs = z[sel]
    if zs.size == 0:
        return RatioStats(zs, sel, float("nan"), float("nan"), int(degenerate.sum()), 0)
    return RatioStats(
        zs, sel, float(np.mean(np.abs(zs))), float(np.mean(np.cos(np.angle(zs)))), int(degenerate.sum()), zs.size
    )


@dataclass(frozen=True)
class SpacingStats:
    raw_spacings: np.ndarray
    unfolded_spacings: np.ndarray
    csr: np.ndarray
    r_mean: float
    cos_theta_mean: float
    bulk_count: int
    degenerate: int
    k_local: int


def spacing_statistics(s, k_local: int = 30) -> SpacingStats:
    """Unfolded bulk spacings and bulk complex-spacing-ratio moments."""
    raw = nn_spacings(s)
    u, edge = unfold_with_mask(s, k_local)
    bulk = ~edge
    ub = u[bulk]
    rs = complex_spacing_ratio(s, mask=bulk)
    return SpacingStats(raw, ub / ub.mean(), rs.z, rs.r_mean, rs.cos_theta_mean, int(bulk.sum()), rs.degenerate, k_local)


def ginibre_sample(n: int, seed=None) -> SpectrumSample:
    """Eigenvalues of an n x n complex Gaussian matrix with entry variance 1/n."""
    if n < 8:
        raise ValueError("n must be >= 8")
    rng = np.random.default_rng(seed)
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    return SpectrumSample(np.linalg.eigvals(G), "rmt-sample")


def poisson_sample(n: int, seed=None) -> SpectrumSample:
    """n independent points uniform in the unit square (integrable benchmark)."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    return SpectrumSample(pts[:, 0] + 1j * pts[:, 1], "rmt-sample")


def histogram_and_distance(unfolded, bins=40, s_max: float = 4.0):
    """Density histogram of unfolded spacings and KS distances to both laws.

    Returns
    -------
    (density, edges), ks_poisson, ks_ginibre
    """
    u = np.asarray(unfolded, dtype=float)
    if u.size < 100:
        raise InsufficientDataError("need at least 100 spacings")
    hist, edges = np.histogram(u, bins=bins, range=(0.0, s_max), density=True)
    ks_p = stats.kstest(u, poisson2d_cdf).statistic
    ks_g = stats.kstest(u, ginibre_cdf).statistic
    return (hist, edges), float(ks_p), float(ks_g)


@dataclass(frozen=True)
class SsqtResult:
    per_eigenstate: list  # (p_k, selected_count, cos_theta_k)
    weighted_cos_theta: float
    c_min: list
    excluded_outliers: int
    selected: list = field(default_factory=list, repr=False)

    @property
    def minus_cos_theta(self) -> float:
        return -self.weighted_cos_theta


def spectral_weights(spec, psi: np.ndarray) -> np.ndarray:
    """c_j = Tr(sigma_j^dagger |psi><psi|) in the biorthonormal basis of ``spec``.

    Ordered like ``spec.vector_index``.
    """
    proj = np.outer(psi, psi.conj())
    return spec.left_eigvecs.conj().T @ fock.vec(proj)


def ssqt(
    spec,
    rho_ss: np.ndarray | None = None,
    p_min: float = 1e-6,
    c_min_factor: float = 1e-3,
    min_count: int = MIN_SELECTED,
    biorth_tol: float = 1e-6,
) -> SsqtResult:
    """Steady-state-weighted eigenvalue selection and its mean cos(theta).

    The steady state is decomposed as sum_k p_k |psi_k><psi_k|; for each
    |psi_k> with p_k >= ``p_min`` the weights c_{k,j} are computed, eigenvalues
    with |c_{k,j}| > c_min are kept, where c_min is ``c_min_factor`` times the
    mean |c_{k,j}| over the weights with |c| <= 1.  States with fewer than
    ``min_count`` kept eigenvalues contribute cos(theta) = 0.

    Raises
    ------
    UnreliableBasisError
        Biorthonormality residual above ``biorth_tol``.
    EmptyDecompositionError
        No eigenstate reaches ``p_min``.
    """
    resid = spec.biorthonormality_residual()
    if resid > biorth_tol:
        raise UnreliableBasisError(f"biorthonormality residual {resid:.2e} exceeds {biorth_tol:g}")
    rho = spec.steady_state if rho_ss is None else np.asarray(rho_ss)
    p, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    order = np.argsort(p)[::-1]
    p, vecs = p[order], vecs[:, order]
    keep = p >= p_min
    if not np.any(keep):
        raise EmptyDecompositionError(f"no eigenstate of rho_ss has weight >= {p_min:g}")
    ev = spec.vector_eigenvalues
    per, cmins, sel_all = [], [], []
    outliers = 0
    weighted = 0.0
    for pk, psi in zip(p[keep], vecs[:, keep].T):
        c = np.abs(spectral_weights(spec, psi))
        small = c <= 1.0
        outliers += int(np.count_nonzero(~small))
        cmin = c_min_factor * float(c[small].mean()) if np.any(small) else 0.0
        sel = np.flatnonzero(c > cmin)
        cos_k = 0.0
        if sel.size >= max(min_count, 3):
            cos_k = complex_spacing_ratio(ev[sel]).cos_theta_mean
        per.append((float(pk), int(sel.size), float(cos_k)))
        cmins.append(cmin)
        sel_all.append(sel)
        weighted += pk * cos_k
    return SsqtResult(per, float(weighted), cmins, outliers, sel_all)
