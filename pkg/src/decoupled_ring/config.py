"""JSON run configuration and bundled presets.

A config is one JSON object.  Unknown keys are rejected so that a typo in a
physics parameter cannot silently fall back to a default.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, RingError
from .model import RingParams

PRESETS = ("fig1b", "fig1c", "fig3a", "fig3b", "fig3c", "fig4")
SCALES = ("linear", "log2")


@dataclass(frozen=True)
class Grid:
    """``count`` points from ``min`` to ``max`` inclusive.

    With ``scale="log2"`` the bounds are actual values (both > 0) and the
    points are evenly spaced in ``log2``.
    """

    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ConfigError(f"grid scale must be one of {SCALES}, got {self.scale!r}")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 1:
            raise ConfigError(f"grid count must be an integer >= 1, got {self.count!r}")
        for name in ("min", "max"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"grid {name} must be a finite number, got {value!r}")
        if self.scale == "log2" and (self.min <= 0 or self.max <= 0):
            raise ConfigError("log2 grid bounds must be positive")
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        if self.scale == "linear":
            return np.linspace(self.min, self.max, self.count)
        return 2.0 ** np.linspace(math.log2(self.min), math.log2(self.max), self.count)

    @classmethod
    def from_dict(cls, data: Any, where: str) -> "Grid":
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: expected an object with min/max/count/scale")
        unknown = set(data) - {"min", "max", "count", "scale"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        missing = {"min", "max", "count"} - set(data)
        if missing:
            raise ConfigError(f"{where}: missing keys {sorted(missing)}")
        try:
            return cls(**data)
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    n: int = 8
    alpha: float = 0.25
    beta: float = 1.0
    omega: float = 2.0
    detuning: float = 0.0
    theta0: float = 0.0
    psi0: float = 0.0
    dt: float = 0.01
    n_steps: int = 10000
    sample_stride: int = 10
    floquet_steps: int = 1000
    psi_grid: Grid = field(default_factory=lambda: Grid(0.0, 2.0 * math.pi, 201))
    omega_grid: Grid = field(default_factory=lambda: Grid(2.0**-4, 2.0, 64, "log2"))
    alpha_grid: Grid = field(default_factory=lambda: Grid(0.0, 1.0, 64))
    output: str | None = None

    def __post_init__(self):
        try:
            self.params()
        except RingError as exc:
            raise type(exc)(f"n/alpha/beta/omega/detuning: {exc}") from None
        if not self.dt > 0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        for name in ("n_steps", "sample_stride", "floquet_steps"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name}: must be an integer >= 1, got {value!r}")

    def params(self) -> RingParams:
        return RingParams(self.n, self.alpha, self.beta, self.omega, self.detuning)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Any) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key.endswith("_grid"):
                kwargs[key] = Grid.from_dict(value, key)
            elif key == "output":
                if value is not None and not isinstance(value, str):
                    raise ConfigError("output: expected a path string or null")
                kwargs[key] = value
            elif key in ("n", "n_steps", "sample_stride", "floquet_steps"):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"{key}: expected an integer, got {value!r}")
                kwargs[key] = value
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{key}: expected a number, got {value!r}")
                kwargs[key] = float(value)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str, source: str = "<config>") -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return RunConfig.from_json(path.read_text(), source=str(path))


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("decoupled_ring.presets").joinpath(f"{name}.json").read_text()
    return RunConfig.from_json(text, source=f"preset {name}")
