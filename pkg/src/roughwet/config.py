"""Run configuration: TOML file plus ``key=value`` overrides.

Angles are given in degrees in the file and converted to radians here.
Example::

    scenario = "solve"

    [surface]
    geometry = "wave_y"
    amplitude = 0.1
    chemistry = "homogeneous"
    theta = 60.0
    eps = 0.0625

    [solver]
    nx = 128
    seed_height = 0.0
"""
from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .solver import SolverConfig
from .surface import CHEMISTRIES, GEOMETRIES, SurfaceSpec, make_surface

SCENARIOS = ("solve", "sweep", "hysteresis", "formula", "validate")
ANGLE_KEYS = ("theta", "theta1", "theta2", "theta_base", "theta_patch")
CHEMISTRY_KEYS = {
    "homogeneous": ("theta",),
    "stripes_y": ("theta1", "theta2", "fraction"),
    "stripes_z": ("theta1", "theta2", "fraction"),
    "checkerboard": ("theta1", "theta2"),
    "patches": ("theta_base", "theta_patch", "size"),
}
GEOMETRY_KEYS = {"flat": (), "wave_y": ("amplitude",), "wave_z": ("amplitude",),
                 "wave_yz": ("amplitude",)}
EPS_RANGE = (1.0 / 64.0, 0.5)
AMPLITUDE_RANGE = (0.0, 0.25)


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


@dataclass
class SurfaceConfig:
    geometry: str = "flat"
    chemistry: str = "homogeneous"
    amplitude: float = 0.1
    theta: float = 90.0
    theta1: float = 60.0
    theta2: float = 120.0
    theta_base: float = 60.0
    theta_patch: float = 110.0
    fraction: float = 0.5
    size: float = 0.5
    eps: float = 0.0625
    eps_list: list = field(default_factory=lambda: [0.25, 0.125, 0.0625, 0.03125])
    n_periods: int = 1
    line_height: float = 0.0

    def build(self, eps: float | None = None) -> SurfaceSpec:
        gp = {k: getattr(self, k) for k in GEOMETRY_KEYS[self.geometry]}
        cp = {}
        for k in CHEMISTRY_KEYS[self.chemistry]:
            v = getattr(self, k)
            cp[k] = math.radians(v) if k in ANGLE_KEYS else v
        return make_surface(self.geometry, self.chemistry, self.eps if eps is None else eps,
                            gp, cp, self.n_periods)


@dataclass
class RunConfig:
    scenario: str = "solve"
    seed: int = 0
    workers: int = 1
    n_offsets: int = 64
    seed_heights: list = field(default_factory=lambda: [0.0])
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    solver: dict = field(default_factory=dict)
    output: str | None = None

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.solver)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("output")
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (output directory excluded)."""
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _coerce(key: str, value, like):
    if isinstance(like, bool):
        if isinstance(value, str):
            if value.lower() in ("true", "1", "yes"):
                return True
            if value.lower() in ("false", "0", "no"):
                return False
            raise ConfigError(key, f"expected a boolean, got {value!r}")
        return bool(value)
    if isinstance(like, int):
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected an integer, got {value!r}") from None
        if f != int(f):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(f)
    if isinstance(like, float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {value!r}") from None
    if isinstance(like, list):
        if isinstance(value, str):
            value = [v for v in value.replace("[", "").replace("]", "").split(",") if v.strip()]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(key, "expected a list")
        return [_coerce(key, v, 0.0) for v in value]
    return str(value)


def _parse_value(text: str):
    """Parse an override value with TOML rules, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _set(cfg: RunConfig, key: str, value) -> None:
    parts = key.split(".")
    if parts[0] == "surface" and len(parts) == 2:
        names = {f.name: f for f in fields(SurfaceConfig)}
        if parts[1] not in names:
            raise ConfigError(key, "unknown surface key")
        setattr(cfg.surface, parts[1], _coerce(key, value, getattr(cfg.surface, parts[1])))
    elif parts[0] == "solver" and len(parts) == 2:
        names = {f.name: f for f in fields(SolverConfig)}
        if parts[1] == "seed_height":
            cfg.seed_heights = [_coerce(key, value, 0.0)]
            return
        if parts[1] not in names:
            raise ConfigError(key, "unknown solver key")
        cfg.solver[parts[1]] = _coerce(key, value, getattr(SolverConfig(), parts[1]))
    elif len(parts) == 1 and parts[0] in {f.name for f in fields(RunConfig)} - {"surface", "solver"}:
        like = getattr(cfg, parts[0])
        cfg.__dict__[parts[0]] = value if like is None else _coerce(key, value, like)
    else:
        raise ConfigError(key, "unknown key")


def _flatten(data: dict, prefix: str = ""):
    for k, v in data.items():
        if isinstance(v, dict):
            yield from _flatten(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}", v


def validate(cfg: RunConfig) -> RunConfig:
    s = cfg.surface
    if cfg.scenario not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {SCENARIOS}")
    if s.geometry not in GEOMETRIES:
        raise ConfigError("surface.geometry", f"unknown geometry {s.geometry!r}")
    if s.chemistry not in CHEMISTRIES:
        raise ConfigError("surface.chemistry", f"unknown chemistry {s.chemistry!r}")
    if not AMPLITUDE_RANGE[0] <= s.amplitude <= AMPLITUDE_RANGE[1]:
        raise ConfigError("surface.amplitude", f"must lie in {list(AMPLITUDE_RANGE)}")
    for k in ANGLE_KEYS:
        if not 0.0 < getattr(s, k) < 180.0:
            raise ConfigError(f"surface.{k}", "angles must lie in (0, 180) degrees")
    for k in ("fraction", "size"):
        if not 0.0 <= getattr(s, k) <= 1.0:
            raise ConfigError(f"surface.{k}", "must lie in [0, 1]")
    for e in [s.eps, *s.eps_list]:
        if not EPS_RANGE[0] <= e <= EPS_RANGE[1]:
            raise ConfigError("surface.eps", f"eps must lie in [1/64, 1/2], got {e}")
    if cfg.scenario == "sweep":
        if len(s.eps_list) < 3 or any(b >= a for a, b in zip(s.eps_list, s.eps_list[1:])):
            raise ConfigError("surface.eps_list", "need at least 3 strictly decreasing values")
    if s.n_periods < 1:
        raise ConfigError("surface.n_periods", "must be a positive integer")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    if not cfg.seed_heights:
        raise ConfigError("seed_heights", "need at least one seed height")
    try:
        sc = cfg.solver_config()
    except (TypeError, ValueError) as exc:
        raise ConfigError("solver", str(exc)) from None
    if any(abs(h) >= sc.M for h in cfg.seed_heights):
        raise ConfigError("seed_heights", f"seed heights must satisfy |z| < M = {sc.M}")
    return cfg


def load_config(path: str | Path | None = None, overrides=(), scenario: str | None = None) -> RunConfig:
    """Read ``path`` (optional), apply ``key=value`` overrides and validate."""
    cfg = RunConfig()
    if path is not None:
        try:
            data = tomllib.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"cannot parse {path}: {exc}") from None
        for key, value in _flatten(data):
            _set(cfg, key, value)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "override must look like key=value")
        _set(cfg, key.strip(), _parse_value(value.strip()))
    if scenario is not None:
        cfg.scenario = scenario
    return validate(cfg)
