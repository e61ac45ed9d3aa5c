"""JSON sweep configuration (schema_version 1).

Frequencies are ordinary frequencies in MHz, powers in dBm at the sample.
Example::

    {
      "schema_version": 1,
      "device": "DUFFING32",
      "method": "harmonic",
      "axes": [
        {"name": "zeta", "min": 0, "max": 120, "points": 21},
        {"name": "delta", "min": -90, "max": 90, "points": 41}
      ],
      "fixed": {"omega_mod": 30.0, "drive_F": 0.5},
      "numerics": {"cutoff": "auto", "harmonics": "auto"},
      "seed": 0
    }

The first axis is the outer (slow) one; rows are written outer-axis major.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError
from ..params import PRESETS, ModelParams

SCHEMA_VERSION = 1
AXIS_NAMES = ("delta", "zeta", "omega_mod", "power_dBm")
METHODS = ("static", "harmonic", "floquet-map", "effective")
PARAM_KEYS = ("delta", "chi", "chi5", "drive_F", "zeta", "omega_mod", "kappa_ext", "kappa_int", "kappa_phi", "omega_d")
FIXED_KEYS = PARAM_KEYS + ("power_dBm",)
SOURCES = ("floquet-liouvillian", "static-liouvillian", "rmt-sample", "external-file")

DEFAULT_NUMERICS = {
    "cutoff": "auto",
    "harmonics": "auto",
    "max_cutoff": 40,
    "rtol": 1e-6,
    "steps_per_period": 64,
    "map_tol": 1e-7,
}

DEFAULT_CHAOS = {
    "source": "floquet-liouvillian",
    "path": None,
    "n": 512,
    "samples": 10,
    "ssqt": True,
    "bins": 30,
    "k_local": 10,
    "cutoff": 30,
    "map_tol": 1e-5,
}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    points: int

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SweepConfig:
    device: str | dict
    method: str
    axes: tuple
    fixed: dict
    numerics: dict
    seed: int = 0
    output: str | None = None
    chaos: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    def base_params(self) -> ModelParams:
        """Device preset (or explicit block) with the fixed overrides applied."""
        if isinstance(self.device, str):
            base = PRESETS[self.device.upper()]
        else:
            base = ModelParams.from_mhz(**self.device)
        over = {k: v for k, v in self.fixed.items() if k in PARAM_KEYS}
        return base.with_mhz(**over) if over else base

    def grid(self):
        """Axis-value tuples in row order (outer axis major)."""
        if len(self.axes) == 1:
            return [(float(v),) for v in self.axes[0].values]
        a, b = self.axes
        return [(float(u), float(v)) for u in a.values for v in b.values]


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _number(value, what):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {value!r}") from None
    _require(np.isfinite(out), f"{what} must be finite")
    return out


def parse_config(doc: dict, method_default: str | None = None) -> SweepConfig:
    """Validate a decoded JSON document and build a :class:`SweepConfig`."""
    _require(isinstance(doc, dict), "config must be a JSON object")
    _require(doc.get("schema_version") == SCHEMA_VERSION, f"schema_version must be {SCHEMA_VERSION}")
    known = {"schema_version", "device", "method", "axes", "fixed", "numerics", "seed", "output", "chaos"}
    extra = set(doc) - known
    _require(not extra, f"unknown config keys: {sorted(extra)}")

    device = doc.get("device", "KERR10")
    if isinstance(device, str):
        _require(device.upper() in PRESETS, f"unknown device preset {device!r}; choose from {sorted(PRESETS)}")
    else:
        _require(isinstance(device, dict), "device must be a preset name or an object of MHz values")
        bad = set(device) - set(PARAM_KEYS)
        _require(not bad, f"unknown device parameters: {sorted(bad)}")
        device = {k: _number(v, f"device.{k}") for k, v in device.items()}

    method = doc.get("method", method_default or "static")
    _require(method in METHODS, f"method must be one of {METHODS}")

    axes_doc = doc.get("axes", [])
    _require(isinstance(axes_doc, list), "axes must be a list")
    axes = []
    for i, ax in enumerate(axes_doc):
        _require(isinstance(ax, dict), f"axes[{i}] must be an object")
        name = ax.get("name")
        _require(name in AXIS_NAMES, f"axes[{i}].name must be one of {AXIS_NAMES}")
        pts = ax.get("points")
        _require(isinstance(pts, int) and pts >= 1, f"axes[{i}].points must be an integer >= 1")
        axes.append(Axis(name, _number(ax.get("min"), f"axes[{i}].min"), _number(ax.get("max"), f"axes[{i}].max"), pts))
    names = [a.name for a in axes]
    _require(len(set(names)) == len(names), "axis names must be distinct")

    fixed = doc.get("fixed", {})
    _require(isinstance(fixed, dict), "fixed must be an object")
    bad = set(fixed) - set(FIXED_KEYS)
    _require(not bad, f"unknown fixed parameters: {sorted(bad)}")
    fixed = {k: _number(v, f"fixed.{k}") for k, v in fixed.items()}
    _require(not ("power_dBm" in fixed and "drive_F" in fixed), "give either fixed.power_dBm or fixed.drive_F")
    _require(
        not ("power_dBm" in names and "drive_F" in fixed), "power_dBm axis and fixed drive_F are mutually exclusive"
    )

    numerics = dict(DEFAULT_NUMERICS)
    numerics.update(doc.get("numerics", {}))
    for key in ("cutoff", "harmonics"):
        v = numerics[key]
        _require(v == "auto" or (isinstance(v, int) and v >= 1), f"numerics.{key} must be 'auto' or a positive integer")
    _require(numerics["cutoff"] == "auto" or numerics["cutoff"] >= 2, "numerics.cutoff must be >= 2")

    seed = doc.get("seed", 0)
    _require(isinstance(seed, int), "seed must be an integer")

    chaos = dict(DEFAULT_CHAOS)
    chaos.update(doc.get("chaos", {}))
    _require(chaos["source"] in SOURCES, f"chaos.source must be one of {SOURCES}")

    cfg = SweepConfig(device, method, tuple(axes), fixed, numerics, seed, doc.get("output"), chaos, copy.deepcopy(doc))
    if method == "static":
        zeta_axis = "zeta" in names
        zeta = cfg.base_params().zeta
        _require(not zeta_axis and zeta == 0, "method=static requires zeta = 0")
    return cfg


def check_axes_count(cfg: SweepConfig):
    _require(1 <= len(cfg.axes) <= 2, "a sweep needs one or two axes")
    for ax in cfg.axes:
        _require(ax.points >= 1, "grids must be non-empty")


def load_config(path: str, method_default: str | None = None) -> SweepConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(doc, method_default)


SPECTRO_DEFAULT = {
    "schema_version": 1,
    "device": "KERR10",
    "method": "static",
    "axes": [
        {"name": "power_dBm", "min": -140.0, "max": -115.0, "points": 11},
        {"name": "delta", "min": -60.0, "max": 15.0, "points": 76},
    ],
    "fixed": {},
    "numerics": {"cutoff": "auto", "max_cutoff": 30},
    "seed": 0,
}

LZSM_DEFAULT = {
    "schema_version": 1,
    "device": "DUFFING32",
    "method": "harmonic",
    "axes": [
        {"name": "zeta", "min": 0.0, "max": 120.0, "points": 21},
        {"name": "delta", "min": -90.0, "max": 90.0, "points": 41},
    ],
    "fixed": {"omega_mod": 30.0, "drive_F": 0.5},
    "numerics": {"cutoff": 6, "harmonics": "auto"},
    "seed": 0,
}

CHAOS_DEFAULT = {
    "schema_version": 1,
    "device": "DUFFING32",
    "method": "floquet-map",
    "axes": [],
    "fixed": {"zeta": 41.3, "omega_mod": 30.0, "delta": -33.0, "drive_F": 25.0},
    "chaos": dict(DEFAULT_CHAOS),
    "seed": 0,
}
