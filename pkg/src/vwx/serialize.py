"""JSON/CSV output and INI run configuration."""

from __future__ import annotations

import configparser
import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .contour import AnnulusParams, ContourState, EvenSeries, theta_grid

__all__ = ["ConfigError", "RunConfig", "load_config", "dumps", "write_json", "read_json",
           "branch_to_dict", "state_from_dict", "write_contour_csv", "write_trajectory_csv"]


class ConfigError(ValueError):
    """Invalid or unparseable run configuration."""


@dataclass
class RunConfig:
    a1: float = 1.0
    a2: float = 2.0
    n: int = 10
    sign: int = 1
    n_max: int = 50
    M: int = 64
    n_theta: int = 256
    n_rho: int = 32
    step: float | None = None
    max_steps: int = 20
    tol: float = 1e-9
    max_newton_iters: int = 25
    dt: float | None = None
    steps: int | None = None
    steps_per_period: int = 2000
    periods: float = 0.25
    frame_every: int = 50
    redistribute_every: int = 0
    out: str = "vwx_out"
    extra: dict = field(default_factory=dict, repr=False)

    def validate(self) -> None:
        if not (0 < self.a1 < self.a2):
            raise ConfigError(f"radii must satisfy 0 < a1 < a2 (got a1={self.a1}, a2={self.a2})")
        if self.sign not in (1, -1):
            raise ConfigError(f"sign must be + or - (got {self.sign})")
        if self.n < 1 or self.n_max < 2:
            raise ConfigError("mode n must be >= 1 and the scan cap >= 2")
        if self.M < 1:
            raise ConfigError("truncation M must be >= 1")
        if self.n_theta < 4 or self.n_theta % 2:
            raise ConfigError(f"n_theta must be even and >= 4 (got {self.n_theta})")
        if self.n_rho < 4:
            raise ConfigError(f"n_rho must be >= 4 (got {self.n_rho})")
        if self.tol <= 0 or (self.step is not None and self.step == 0):
            raise ConfigError("tolerance must be positive and step nonzero")

    @property
    def params(self) -> AnnulusParams:
        return AnnulusParams(self.a1, self.a2)


# INI section -> keys it may contain
_SECTIONS = {
    "params": ("a1", "a2"),
    "mode": ("n", "sign", "n_max"),
    "truncation": ("M",),
    "quadrature": ("n_theta", "n_rho"),
    "continuation": ("step", "max_steps", "tol", "max_newton_iters"),
    "evolution": ("dt", "steps", "steps_per_period", "periods", "frame_every", "redistribute_every"),
    "output": ("out",),
}


def _parse_sign(v: str) -> int:
    v = v.strip()
    if v in ("+", "+1", "1", "plus"):
        return 1
    if v in ("-", "-1", "minus"):
        return -1
    raise ValueError(f"expected + or -, got {v!r}")


def _converter(name: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    t = str(types[name])
    if name == "sign":
        return _parse_sign
    if "int" in t:
        return lambda s: int(s) if s.strip().lower() != "none" else None
    if "float" in t:
        return lambda s: float(s) if s.strip().lower() != "none" else None
    return str


def load_config(path) -> RunConfig:
    """Read an INI file; errors name the file, section, key and line where possible."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = RunConfig()
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{path}: [{section}] unknown key {key!r}")
            try:
                setattr(cfg, key, _converter(key)(raw))
            except ValueError as exc:
                raise ConfigError(f"{path}: [{section}] {key} = {raw!r}: {exc}") from exc
    return cfg


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON; floats use the shortest repr that round-trips exactly."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(obj), encoding="utf-8")
    return p


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def state_to_dict(st: ContourState) -> dict:
    return {"omega": st.omega, "x1": st.x1, "r1": st.r1.coeffs, "r2": st.r2.coeffs}


def state_from_dict(d: dict, params: AnnulusParams) -> ContourState:
    return ContourState(params, EvenSeries(d["r1"]), EvenSeries(d["r2"]), d["x1"], d["omega"], check_margins=False)


def branch_to_dict(rec) -> dict:
    bp = rec.bifurcation
    return {
        "params": {"a1": bp.params.a1, "a2": bp.params.a2},
        "bifurcation": {
            "n": bp.n, "sign": bp.sign, "omega": bp.omega, "omega_minus": bp.omega_minus,
            "omega_plus": bp.omega_plus, "delta_n": bp.delta_n, "kernel": bp.kernel_pair,
            "cokernel": bp.cokernel, "transversality": bp.transversality,
        },
        "config": {"M": rec.config.M, "n_theta": rec.config.spec.n_theta, "n_rho": rec.config.spec.n_rho,
                   "newton_tol": rec.config.newton_tol},
        "points": [
            dict(s=p.s, **state_to_dict(p.state), residual_norm=p.residual_norm,
                 boundary_constancy=p.constancy, newton_iters=p.newton_iters,
                 x1_drift=p.x1_drift, truncation_energy=p.truncation_energy)
            for p in rec.points
        ],
        "error": None if rec.error is None else f"{type(rec.error).__name__}: {rec.error}",
    }


def write_contour_csv(path, st: ContourState, n_points: int = 256) -> Path:
    """Columns ``theta,x,y,layer``; each layer repeats its first node at the end."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    theta = theta_grid(n_points)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "x", "y", "layer"])
        for layer in (1, 2):
            z, _ = st.nodes(layer, n_points)
            for t, zz in zip(np.r_[theta, 2 * np.pi], np.r_[z, z[:1]]):
                w.writerow([repr(float(t)), repr(float(zz.real)), repr(float(zz.imag)), layer])
    return p


def write_trajectory_csv(path, frames) -> Path:
    """One row per node (and per vortex) per frame."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "time", "kind", "index", "node", "x", "y"])
        for f, st in enumerate(frames):
            t = repr(float(st.time))
            for i, c in enumerate(st.contours):
                for j, zz in enumerate(c.z):
                    w.writerow([f, t, "contour", i, j, repr(float(zz.real)), repr(float(zz.imag))])
            for i, v in enumerate(st.vortices):
                w.writerow([f, t, "vortex", i, 0, repr(float(v.real)), repr(float(v.imag))])
    return p


def config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("extra", None)
    return d
