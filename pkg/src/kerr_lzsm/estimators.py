"""scikit-learn style wrappers around the simulators.

These are thin adapters: ``fit`` validates inputs and freezes the model
(optionally calibrating the drive amplitude against measured |S21|); all
physics lives in the library modules.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import chaos, effective, floquet, lindblad
from .params import PRESETS, ModelParams, mhz, to_mhz


class TransmissionModel(RegressorMixin, BaseEstimator):
    """|S21| of the (modulated) Kerr resonator as a regressor.

    Parameters
    ----------
    device : str
        Preset name.
    drive_F_MHz : float
        Drive amplitude F/2pi; refined by ``fit`` when ``y`` is given.
    omega_mod_MHz : float
    method : {"static", "harmonic", "effective"}
    cutoff : int
        Fock cutoff.
    calibrate : bool
        Fit F to the measured |S21| in ``fit``.

    Notes
    -----
    ``X`` has columns (delta_MHz,) or (delta_MHz, zeta_MHz).
    """

    def __init__(
        self,
        device: str = "KERR10",
        drive_F_MHz: float = 0.5,
        omega_mod_MHz: float = 30.0,
        method: str = "static",
        cutoff: int = 10,
        calibrate: bool = False,
    ):
        self.device = device
        self.drive_F_MHz = drive_F_MHz
        self.omega_mod_MHz = omega_mod_MHz
        self.method = method
        self.cutoff = cutoff
        self.calibrate = calibrate

    def _params(self, row, F) -> ModelParams:
        p = self.base_.replace(delta=mhz(row[0]), drive_F=F)
        if row.size > 1:
            p = p.replace(zeta=mhz(row[1]))
        return p

    def _s21(self, X, F) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=complex)
        for i, row in enumerate(X):
            p = self._params(row, F)
            if self.method == "static" or p.zeta == 0:
                a = lindblad.steady_state(p.replace(zeta=0.0), self.cutoff, warn=False).coherence_a
            elif self.method == "harmonic":
                h = floquet.harmonic_steady_state(p, self.cutoff, warn=False)
                a = floquet.time_averaged_observables(h)[1]
            else:
                mode = effective.effective_mode(p)
                a = effective.effective_steady(mode, p, self.cutoff, warn=False).coherence_a
                a *= effective.bessel_j(mode.m_bar, p.zeta / p.omega_mod)
            out[i] = lindblad.s21_from_field(a, F, p.kappa_ext)
        return out

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        if X.shape[1] not in (1, 2):
            raise ValueError("X must have 1 (delta) or 2 (delta, zeta) columns")
        if self.method not in ("static", "harmonic", "effective"):
            raise ValueError("method must be static, harmonic or effective")
        if self.device.upper() not in PRESETS:
            raise ValueError(f"unknown device {self.device!r}")
        if X.shape[1] == 2 and self.method == "static" and np.any(X[:, 1] != 0):
            raise ValueError("method='static' requires zeta = 0")
        self.base_ = PRESETS[self.device.upper()].with_mhz(omega_mod=self.omega_mod_MHz)
        self.n_features_in_ = X.shape[1]
        F0 = mhz(self.drive_F_MHz)
        if self.calibrate:
            if y is None:
                raise ValueError("calibrate=True needs measured |S21| in y")
            y = np.asarray(y, dtype=float).ravel()
            if y.size != X.shape[0]:
                raise ValueError("X and y lengths differ")

            def loss(logF):
                return float(np.sum((np.abs(self._s21(X, np.exp(logF))) - y) ** 2))

            res = minimize_scalar(loss, bounds=(np.log(F0) - 3, np.log(F0) + 3), method="bounded")
            F0 = float(np.exp(res.x))
        self.drive_F_ = F0
        return self

    @property
    def drive_F_MHz_(self) -> float:
        check_is_fitted(self, "drive_F_")
        return to_mhz(self.drive_F_)

    def predict_complex(self, X) -> np.ndarray:
        check_is_fitted(self, "drive_F_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self._s21(X, self.drive_F_)

    def predict(self, X) -> np.ndarray:
        return np.abs(self.predict_complex(X))


class SpacingStatistics(TransformerMixin, BaseEstimator):
    """Unfolded nearest-neighbour spacings and complex spacing ratios.

    ``fit`` takes eigenvalues as a complex vector or an (n, 2) array of
    (real, imaginary) parts and stores the bulk statistics; ``transform``
    returns one unfolded spacing per eigenvalue (NaN in the edge band).
    """

    def __init__(self, k_local: int = 30, bins: int = 40):
        self.k_local = k_local
        self.bins = bins

    @staticmethod
    def _points(X) -> np.ndarray:
        X = np.asarray(X)
        if np.iscomplexobj(X):
            return X.ravel()
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 2:
            raise ValueError("real input must have two columns (re, im)")
        return X[:, 0] + 1j * X[:, 1]

    def fit(self, X, y=None):
        z = self._points(X)
        st = chaos.spacing_statistics(z, k_local=self.k_local)
        self.r_mean_ = st.r_mean
        self.cos_theta_mean_ = st.cos_theta_mean
        self.bulk_count_ = st.bulk_count
        self.unfolded_ = st.unfolded_spacings
        if st.unfolded_spacings.size >= 100:
            _, self.ks_poisson_, self.ks_ginibre_ = chaos.histogram_and_distance(st.unfolded_spacings, self.bins)
        else:
            self.ks_poisson_ = self.ks_ginibre_ = float("nan")
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "r_mean_")
        z = self._points(X)
        u, edge = chaos.unfold_with_mask(z, self.k_local)
        out = np.where(edge, np.nan, u)
        return out[:, None]

    def closer_to(self) -> str:
        check_is_fitted(self, "r_mean_")
        return "ginibre" if self.ks_ginibre_ < self.ks_poisson_ else "poisson"
