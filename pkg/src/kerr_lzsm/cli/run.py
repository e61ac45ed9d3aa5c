"""Sweep orchestration and artifact writing."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy

from .. import __version__, chaos, effective, floquet, fock, lindblad
from .._parallel import parallel_map
from ..exceptions import ConfigError, CutoffGuardError, InsufficientDataError, KerrLZSMError
from ..params import ModelParams, to_mhz
from . import svg
from .config import SweepConfig, check_axes_count

CSV_HEADER = (
    "axis1",
    "axis2",
    "delta_MHz",
    "zeta_MHz",
    "omega_MHz",
    "F_MHz",
    "n_avg",
    "s21_re",
    "s21_im",
    "s21_abs",
    "cutoff_used",
    "harmonics_used",
    "status",
)
DEGRADED_FRACTION = 0.10
CHAOS_CUTOFF_GUARD = 48

_AXIS_FIELD = {"delta": "delta", "zeta": "zeta", "omega_mod": "omega_mod"}


def fmt(value) -> str:
    """Canonical number formatting for every CSV cell.

    Shortest round-trip representation, so a value read back is bit-identical.
    """
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class SweepResult:
    rows: list
    metadata: dict
    failures: int = 0
    degraded: bool = False
    grid_shape: tuple = field(default_factory=tuple)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r[k] if isinstance(r[k], str) else fmt(r[k]) for k in CSV_HEADER])
        return buf.getvalue()


def point_params(cfg: SweepConfig, values) -> ModelParams:
    """Model parameters at one grid point (axis values in MHz or dBm)."""
    p = cfg.base_params()
    over = {}
    power = cfg.fixed.get("power_dBm")
    for ax, v in zip(cfg.axes, values):
        if ax.name == "power_dBm":
            power = v
        else:
            over[_AXIS_FIELD[ax.name]] = v
    if over:
        p = p.with_mhz(**over)
    if power is not None:
        p = p.replace(drive_F=float(lindblad.drive_from_power(power, p.omega_d, p.kappa_ext)))
    return p


def _solve_point(method: str, p: ModelParams, numerics: dict):
    """(photon number, <a>, cutoff, harmonics) for one parameter set."""
    cutoff = numerics["cutoff"]
    max_cut = int(numerics.get("max_cutoff", 40))
    rtol = float(numerics.get("rtol", 1e-6))
    if method == "static":
        if cutoff == "auto":
            res = lindblad.steady_state_auto(p, max_cutoff=max_cut, rtol=rtol)
        else:
            res = lindblad.steady_state(p, cutoff)
        return res.photon_number, res.coherence_a, res.cutoff_used, 0
    if method == "harmonic":
        M = None if numerics["harmonics"] == "auto" else int(numerics["harmonics"])
        if cutoff == "auto":
            h = floquet.harmonic_steady_state_auto(p, max_cutoff=max_cut, rtol=rtol, M=M)
        else:
            h = floquet.harmonic_steady_state(p, cutoff, M=M, adapt=M is None)
        n, a, _ = floquet.time_averaged_observables(h)
        return n, a, h.dim, h.M
    if method == "effective":
        mode = effective.effective_mode(p)
        if cutoff == "auto":
            start = lindblad.initial_cutoff(max(lindblad.mean_field_photon_roots(
                p.replace(delta=mode.delta_eff, drive_F=mode.drive_eff, zeta=0.0))))
            res = lindblad.adapt_cutoff(
                lambda d: effective.effective_steady(mode, p, d, warn=False), start, max_cut, rtol, stacklevel=3
            )
        else:
            res = effective.effective_steady(mode, p, cutoff)
        # lab-frame period average of <a>: the resonant sideband carries weight J_m
        weight = effective.bessel_j(mode.m_bar, p.zeta / p.omega_mod) if p.omega_mod > 0 else 1.0
        return res.photon_number, weight * res.coherence_a, res.cutoff_used, 0
    if method == "floquet-map":
        dim = (
            min(max_cut, lindblad.initial_cutoff(floquet.estimate_photon_number(p)))
            if cutoff == "auto"
            else int(cutoff)
        )
        if p.zeta == 0 or p.omega_mod <= 0:
            res = lindblad.steady_state(p, dim)
            return res.photon_number, res.coherence_a, dim, 0
        fmap = floquet.floquet_map(
            p,
            dim,
            steps_per_period=int(numerics.get("steps_per_period", 64)),
            method="split",
            tol=float(numerics.get("map_tol", 1e-7)),
            extrapolate=True,
        )
        spec = floquet.floquet_liouvillian(fmap)
        rho_bar = floquet.period_average(spec.steady_state, p)
        fock.check_cutoff(rho_bar)
        return fock.photon_number(rho_bar), fock.coherence(rho_bar), dim, 0
    raise ConfigError(f"unknown method {method!r}")


def evaluate_point(task):
    """Worker entry: one grid row.  Never raises; failures go to ``status``."""
    cfg, values = task
    axis1 = values[0]
    axis2 = values[1] if len(values) > 1 else ""
    row = {"axis1": axis1, "axis2": axis2}
    try:
        p = point_params(cfg, values)
    except KerrLZSMError as exc:
        row.update(delta_MHz=math.nan, zeta_MHz=math.nan, omega_MHz=math.nan, F_MHz=math.nan)
        return _failed(row, exc)
    row.update(
        delta_MHz=to_mhz(p.delta), zeta_MHz=to_mhz(p.zeta), omega_MHz=to_mhz(p.omega_mod), F_MHz=to_mhz(p.drive_F)
    )
    status = "ok"
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            n, a, cut, harm = _solve_point(cfg.method, p, cfg.numerics)
        if caught:
            status = "warn:" + type(caught[0].message).__name__
        s21 = lindblad.s21_from_field(a, p.drive_F, p.kappa_ext) if p.drive_F != 0 else complex(1.0)
    except (KerrLZSMError, np.linalg.LinAlgError, ValueError) as exc:
        return _failed(row, exc)
    row.update(
        n_avg=float(n),
        s21_re=float(s21.real),
        s21_im=float(s21.imag),
        s21_abs=float(abs(s21)),
        cutoff_used=int(cut),
        harmonics_used=int(harm),
        status=status,
    )
    return row


def _failed(row, exc):
    row.update(
        n_avg=math.nan,
        s21_re=math.nan,
        s21_im=math.nan,
        s21_abs=math.nan,
        cutoff_used=0,
        harmonics_used=0,
        status="failed:" + type(exc).__name__,
    )
    return row


def versions() -> dict:
    return {
        "kerr_lzsm": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run_sweep(cfg: SweepConfig, jobs: int | None = None) -> SweepResult:
    """Evaluate ``cfg.method`` on every grid point, rows in outer-axis-major order."""
    check_axes_count(cfg)
    grid = cfg.grid()
    t0 = time.perf_counter()
    rows = parallel_map(evaluate_point, [(cfg, v) for v in grid], jobs)
    wall = time.perf_counter() - t0
    failures = sum(r["status"].startswith("failed") for r in rows)
    degraded = failures > DEGRADED_FRACTION * len(rows)
    meta = {
        "config": cfg.raw,
        "seed": cfg.seed,
        "versions": versions(),
        "wall_time_s": wall,
        "points": len(rows),
        "failures": failures,
        "status": "degraded" if degraded else "ok",
        "units": {"frequencies": "MHz (ordinary frequency)", "power": "dBm at the sample"},
    }
    shape = tuple(ax.points for ax in cfg.axes)
    return SweepResult(rows, meta, failures, degraded, shape)


def _axis_label(name: str) -> str:
    return {
        "delta": "detuning Delta/2pi (MHz)",
        "zeta": "modulation zeta/2pi (MHz)",
        "omega_mod": "modulation frequency Omega/2pi (MHz)",
        "power_dBm": "power (dBm)",
    }[name]


def write_sweep(result: SweepResult, cfg: SweepConfig, out: str) -> list:
    os.makedirs(out, exist_ok=True)
    written = []
    path = os.path.join(out, "results.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(result.csv_text())
    written.append(path)
    path = os.path.join(out, "metadata.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    z = np.array([r["s21_abs"] for r in result.rows], dtype=float)
    if len(cfg.axes) == 2:
        a, b = cfg.axes
        text = svg.heatmap(
            b.values, a.values, z.reshape(a.points, b.points), _axis_label(b.name), _axis_label(a.name),
            title=f"|S21| ({cfg.method})", zlabel="|S21|",
        )
        path = os.path.join(out, "heatmap.svg")
    else:
        ax = cfg.axes[0]
        text = svg.line_plot([("|S21|", ax.values, z)], _axis_label(ax.name), "|S21|", title=f"|S21| ({cfg.method})")
        path = os.path.join(out, "curves.svg")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    written.append(path)
    return written


# --------------------------------------------------------------------------- chaos


def read_eigenvalues(path: str) -> np.ndarray:
    """Eigenvalue interchange file: CSV with header ``re,im``."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read eigenvalues {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["re", "im"]:
        raise ConfigError(f"{path}: expected header 're,im'")
    try:
        vals = np.array([float(r[0]) + 1j * float(r[1]) for r in rows[1:] if r])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed row: {exc}") from exc
    return vals


def write_eigenvalues(path: str, vals) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("re,im\n")
        for v in np.asarray(vals, dtype=complex):
            fh.write(f"{fmt(v.real)},{fmt(v.imag)}\n")


def _json_num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def chaos_run(cfg: SweepConfig, out: str, force: bool = False) -> dict:
    """Spectral statistics of one spectrum and the associated artifacts.

    Raises
    ------
    CutoffGuardError
        Floquet source with cutoff above 48 and ``force`` false; the message
        carries a cost estimate.
    """
    opts = cfg.chaos
    source = opts["source"]
    k_local = int(opts["k_local"])
    t0 = time.perf_counter()
    info = {"source": source}
    spec = None
    samples = []
    if source == "floquet-liouvillian":
        p = cfg.base_params()
        dim = int(opts["cutoff"])
        if dim > CHAOS_CUTOFF_GUARD and not force:
            est = floquet.estimate_map_seconds(dim, 512, "split")
            raise CutoffGuardError(
                f"cutoff {dim} exceeds the guard of {CHAOS_CUTOFF_GUARD}; estimated cost ~{est:.0f} s "
                f"and ~{16 * dim**4 / 1e9:.1f} GB per superoperator; rerun with --force"
            )
        fmap = floquet.floquet_map(p, dim, method="split", tol=float(opts["map_tol"]), extrapolate=True)
        spec = floquet.floquet_liouvillian(fmap)
        samples = [spec.resolved_eigenvalues]
        rho = spec.steady_state
        info.update(
            cutoff=dim,
            map_steps=fmap.steps,
            basis=spec.basis,
            resolved=int(spec.resolved.sum()),
            purity=_json_num(fock.purity(rho)),
            photon_number=_json_num(fock.photon_number(rho)),
            params_MHz=p.to_mhz(),
        )
    elif source == "static-liouvillian":
        p = cfg.base_params()
        if p.zeta != 0:
            raise ConfigError("static-liouvillian source requires zeta = 0")
        dim = int(opts["cutoff"])
        samples = [np.linalg.eigvals(fock.static_liouvillian(p, dim))]
        info.update(cutoff=dim, params_MHz=p.to_mhz())
    elif source == "rmt-sample":
        ens = opts.get("ensemble", "ginibre")
        sampler = {"ginibre": chaos.ginibre_sample, "poisson": chaos.poisson_sample}.get(ens)
        if sampler is None:
            raise ConfigError("chaos.ensemble must be 'ginibre' or 'poisson'")
        rng = np.random.default_rng(cfg.seed)
        seeds = rng.integers(0, 2**63 - 1, size=int(opts["samples"]))
        samples = [sampler(int(opts["n"]), int(s)).eigenvalues for s in seeds]
        info.update(ensemble=ens, n=int(opts["n"]), samples=len(samples))
    else:
        if not opts.get("path"):
            raise ConfigError("chaos.path is required for source external-file")
        samples = [read_eigenvalues(opts["path"])]
        info.update(path=opts["path"])

    os.makedirs(out, exist_ok=True)
    write_eigenvalues(os.path.join(out, "eigenvalues.csv"), np.concatenate(samples))

    unfolded, zs, raw_all, bulk_total, degenerate = [], [], [], 0, 0
    for s in samples:
        st = chaos.spacing_statistics(s, k_local=k_local)
        unfolded.append(st.unfolded_spacings)
        zs.append(st.csr)
        raw_all.append(st.raw_spacings)
        bulk_total += st.bulk_count
        degenerate += st.degenerate
    u = np.concatenate(unfolded)
    z = np.concatenate(zs)
    with open(os.path.join(out, "spacings.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("unfolded\n")
        for v in u:
            fh.write(fmt(v) + "\n")
    csr = {
        "r_mean": _json_num(np.mean(np.abs(z))) if z.size else None,
        "cos_theta_mean": _json_num(np.mean(np.cos(np.angle(z)))) if z.size else None,
        "count": int(z.size),
        "bulk_count": int(bulk_total),
        "eigenvalue_count": int(sum(len(s) for s in samples)),
        "degenerate": int(degenerate),
        "k_local": k_local,
        "reference": {
            "ginibre": {"r_mean": chaos.GINIBRE_R, "cos_theta_mean": -chaos.GINIBRE_MINUS_COS},
            "poisson": {"r_mean": chaos.POISSON_R, "cos_theta_mean": -chaos.POISSON_MINUS_COS},
        },
    }
    bins = int(opts["bins"])
    try:
        (hist, edges), ks_p, ks_g = chaos.histogram_and_distance(u, bins=bins)
        csr.update(ks_poisson=ks_p, ks_ginibre=ks_g, closer_to="ginibre" if ks_g < ks_p else "poisson")
    except InsufficientDataError:
        hist, edges = np.histogram(u, bins=bins, range=(0.0, 4.0), density=True)
        csr.update(ks_poisson=None, ks_ginibre=None, closer_to=None)
    with open(os.path.join(out, "csr.json"), "w", encoding="utf-8") as fh:
        json.dump(csr, fh, indent=2, sort_keys=True)
        fh.write("\n")

    ss = {"computed": False}
    if opts.get("ssqt") and spec is not None:
        res = chaos.ssqt(spec)
        ss = {
            "computed": True,
            "weighted_cos_theta": res.weighted_cos_theta,
            "minus_cos_theta": res.minus_cos_theta,
            "per_eigenstate": [{"p": pk, "selected": cnt, "cos_theta": ct} for pk, cnt, ct in res.per_eigenstate],
            "c_min": res.c_min,
            "excluded_outliers": res.excluded_outliers,
        }
    elif opts.get("ssqt"):
        ss["reason"] = "SSQT needs a Floquet spectrum with eigenvectors"
    with open(os.path.join(out, "ssqt.json"), "w", encoding="utf-8") as fh:
        json.dump(ss, fh, indent=2, sort_keys=True)
        fh.write("\n")

    grid = np.linspace(0.0, 4.0, 201)
    text = svg.line_plot(
        [("Poisson", grid, chaos.poisson2d_pdf(grid)), ("Ginibre", grid, chaos.ginibre_pdf(grid))],
        "unfolded spacing s",
        "P(s)",
        title=f"nearest-neighbour spacings ({source})",
        bars=(edges, hist),
    )
    with open(os.path.join(out, "histogram.svg"), "w", encoding="utf-8") as fh:
        fh.write(text)
    meta = {
        "config": cfg.raw,
        "seed": cfg.seed,
        "versions": versions(),
        "wall_time_s": time.perf_counter() - t0,
        "spectrum": info,
    }
    with open(os.path.join(out, "metadata.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return {"csr": csr, "ssqt": ss, "spectrum": info}


def stderr(msg: str) -> None:
    print(msg, file=sys.stderr)
