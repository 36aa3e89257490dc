"""JSON run configuration: schema validation and conversion to library objects.

Angles are given in degrees and delays in nanoseconds; everything is
converted to radians and seconds here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
from jsonschema import Draft202012Validator

from .aml import AmlConfig
from .doa_only import DoaOnlyConfig
from .montecarlo import Scenario, SweepSpec
from .signal_model import ArrayGeometry, NoiseSpec, PathSet, SubcarrierGrid


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["array", "grid", "paths"],
    "properties": {
        "array": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "M"],
            "properties": {
                "kind": {"enum": ["uca", "ula"]},
                "M": _POS_INT,
                "radius_lambda": _POS,
                "spacing_lambda": _POS,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["carrier_hz", "spacing_hz", "total_bins"],
            "properties": {
                "carrier_hz": _NUM,
                "spacing_hz": _POS,
                "total_bins": _POS_INT,
                "active_bins": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "oneOf": [
                            {"type": "integer", "minimum": 0},
                            {"type": "array", "minItems": 2, "maxItems": 2,
                             "items": {"type": "integer", "minimum": 0}},
                        ]
                    },
                },
            },
        },
        "spectrum": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUM},
        },
        "paths": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["theta_deg", "tau_ns"],
                "properties": {
                    "theta_deg": _NUM,
                    "tau_ns": {"type": "number", "minimum": 0},
                    "beta_re": _NUM,
                    "beta_im": _NUM,
                    "beta_abs": {"type": "number", "minimum": 0},
                    "random_phase": {"type": "boolean"},
                },
                "oneOf": [
                    {"required": ["beta_re", "beta_im"]},
                    {"required": ["beta_abs"]},
                ],
                "dependentRequired": {"random_phase": ["beta_abs"]},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"snr_db": _NUM, "sigma2": {"type": "number", "minimum": 0}},
            "oneOf": [{"required": ["snr_db"]}, {"required": ["sigma2"]}],
        },
        "estimator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["aml", "doa_only", "both"]},
                "aml": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "max_iterations": _POS_INT,
                        "theta_step_deg": _POS,
                        "tau_step_ns": _POS,
                        "refine_tol_theta_rad": _POS,
                        "refine_tol_tau_s": _POS,
                        "converge_tol": _POS,
                    },
                },
                "doa_only": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "max_iterations": _POS_INT,
                        "theta_step_deg": _POS,
                        "refine_tol_theta_rad": _POS,
                    },
                },
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["variable", "values"],
            "properties": {
                "variable": {"enum": ["snr_db", "delta_theta", "delta_tau"]},
                "values": {"type": "array", "minItems": 1, "items": _NUM},
            },
        },
        "trials": _POS_INT,
        "seed": {"type": "integer", "minimum": 0},
    },
}

_VALIDATOR = Draft202012Validator(SCHEMA)


def _path_str(parts) -> str:
    out = "config"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate(doc) -> None:
    """Raise :class:`ConfigError` naming the first offending key path."""
    errors = list(_VALIDATOR.iter_errors(doc))
    if not errors:
        return
    err = min(errors, key=lambda e: (list(map(str, e.absolute_path)), e.message))
    parts = list(err.absolute_path)
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        if extra:
            raise ConfigError(f"{_path_str(parts + [extra[0]])}: unknown key")
    raise ConfigError(f"{_path_str(parts)}: {err.message}")


@dataclass
class RunConfig:
    geometry: ArrayGeometry
    grid: SubcarrierGrid
    spectrum: np.ndarray | None
    paths: PathSet
    random_phase: tuple
    noise: NoiseSpec | None
    method: str
    aml: AmlConfig
    doa_only: DoaOnlyConfig
    sweep_variable: str | None
    sweep_values: tuple | None
    trials: int
    seed: int

    @property
    def estimators(self) -> tuple:
        return {"aml": ("aml",), "doa_only": ("doa_only",),
                "both": ("aml", "doa_only")}[self.method]

    def scenario(self) -> Scenario:
        noise = self.noise if self.noise is not None else NoiseSpec(sigma2=0.0)
        return Scenario(self.geometry, self.grid, self.paths, noise, self.spectrum,
                        self.random_phase, self.estimators, self.trials, self.seed,
                        self.aml, self.doa_only)

    def sweep_spec(self) -> SweepSpec:
        if self.sweep_variable is None:
            raise ConfigError("config.sweep: section is required for sweeps")
        return SweepSpec(self.scenario(), self.sweep_variable, self.sweep_values)


def _bins(items):
    out = []
    for it in items:
        if isinstance(it, list):
            out.extend(range(it[0], it[1]))
        else:
            out.append(it)
    return np.array(out, dtype=int)


def build(doc, trials=None, seed=None) -> RunConfig:
    """Validate ``doc`` and convert it; ``trials``/``seed`` override the document."""
    try:
        return _build(doc, trials, seed)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from None


def _build(doc, trials, seed) -> RunConfig:
    validate(doc)
    arr = doc["array"]
    if arr["kind"] == "uca":
        if "radius_lambda" not in arr:
            raise ConfigError("config.array.radius_lambda: required for kind 'uca'")
        geom = ArrayGeometry.uca(arr["M"], arr["radius_lambda"])
    else:
        if "spacing_lambda" not in arr:
            raise ConfigError("config.array.spacing_lambda: required for kind 'ula'")
        geom = ArrayGeometry.ula(arr["M"], arr["spacing_lambda"])

    g = doc["grid"]
    try:
        bins = _bins(g["active_bins"]) if "active_bins" in g else None
        grid = SubcarrierGrid(float(g["carrier_hz"]), float(g["spacing_hz"]),
                              int(g["total_bins"]), bins)
    except ValueError as exc:
        raise ConfigError(f"config.grid: {exc}") from None

    spectrum = None
    if "spectrum" in doc:
        spectrum = np.array([complex(re, im) for re, im in doc["spectrum"]])
        if spectrum.size != grid.K:
            raise ConfigError(
                f"config.spectrum: has {spectrum.size} entries, grid has K={grid.K}")
        if not np.any(spectrum):
            raise ConfigError("config.spectrum: all entries are zero")

    theta, tau, beta, flags = [], [], [], []
    for p in doc["paths"]:
        theta.append(np.deg2rad(p["theta_deg"]))
        tau.append(p["tau_ns"] * 1e-9)
        if "beta_abs" in p:
            beta.append(complex(p["beta_abs"]))
            flags.append(bool(p.get("random_phase", False)))
        else:
            beta.append(complex(p["beta_re"], p["beta_im"]))
            flags.append(False)
    paths = PathSet(theta, tau, beta)
    L = paths.L
    if L > geom.M:
        raise ConfigError(f"config.paths: {L} paths exceed the M={geom.M} sensors")

    noise = None
    if "noise" in doc:
        noise = NoiseSpec(**doc["noise"])

    est = doc.get("estimator", {})
    a = est.get("aml", {})
    o = est.get("doa_only", {})
    aml = AmlConfig(
        L,
        max_iterations=a.get("max_iterations", 10),
        theta_step=np.deg2rad(a.get("theta_step_deg", 1.0)),
        tau_step=a.get("tau_step_ns", 1.0) * 1e-9,
        refine_tol_theta=a.get("refine_tol_theta_rad", 1e-4),
        refine_tol_tau=a.get("refine_tol_tau_s", 1e-11),
        converge_tol=a.get("converge_tol", 1e-8),
    )
    doa = DoaOnlyConfig(
        L,
        theta_step=np.deg2rad(o.get("theta_step_deg", 1.0)),
        refine_tol_theta=o.get("refine_tol_theta_rad", 1e-4),
        max_iterations=o.get("max_iterations", 20),
    )

    variable = values = None
    if "sweep" in doc:
        variable = doc["sweep"]["variable"]
        scale = {"snr_db": 1.0, "delta_theta": np.deg2rad(1.0), "delta_tau": 1e-9}[variable]
        values = tuple(v * scale for v in doc["sweep"]["values"])
        if variable != "snr_db" and L < 2:
            raise ConfigError(f"config.sweep.variable: {variable} needs at least two paths")
        if variable == "delta_tau" and any(tau[0] + v < 0 for v in values):
            raise ConfigError("config.sweep.values: delays must stay non-negative")

    return RunConfig(geom, grid, spectrum, paths, tuple(flags), noise,
                     est.get("method", "both"), aml, doa, variable, values,
                     int(trials if trials is not None else doc.get("trials", 100)),
                     int(seed if seed is not None else doc.get("seed", 0)))


def load(path, trials=None, seed=None) -> RunConfig:
    """Read and build a configuration file.

    ``OSError`` propagates for unreadable files; malformed JSON becomes
    :class:`ConfigError`.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return build(doc, trials, seed)


def bundled_config(name: str):
    """Path-like handle to a shipped example config, e.g. ``"snr_sweep.json"``."""
    return resources.files("jointdoa") / "configs" / name
