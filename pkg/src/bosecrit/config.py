"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` and blank lines are ignored.  Tuples are written
comma-separated, floats with ``repr`` so that reading back a dumped config
gives an identical object.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import get_type_hints

__all__ = ["ConfigError", "ExperimentConfig", "COMMANDS", "parse_config", "load_config"]

COMMANDS = ("portrait", "spectrum", "dos", "ladder", "otoc", "scaling")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "spectrum"
    n_particles: int = 300
    alpha: float = 2.0
    mode_cutoff: int = 1
    # portrait
    alphas: tuple[float, ...] = (0.8, 1.0, 2.0)
    n_z: int = 101
    n_phi: int = 128
    orbit_points: int = 200
    # spectrum sweep
    alpha_min: float = 0.0
    alpha_max: float = 2.0
    alpha_steps: int = 201
    levels: int = 50
    # dos / ladder
    energy_window: float = 40.0
    ladder_window: int = 10
    ladder_method: str = "auto"
    dos_offset: float = 0.0
    tau_offset: float = 0.0
    # sweeps over particle number
    n_list: tuple[int, ...] = (100, 1000, 10000)
    # time grid
    t_max: float = 70.0
    n_steps: int = 1400
    entropy: bool = True
    peak_smoothing: int = 3
    peak_threshold: float = 0.05
    # scaling
    scan_min: float = 0.9
    scan_max: float = 1.3
    scan_steps: int = 41
    # numerics
    quad_tol: float = 1e-14
    solver_tol: float = 1e-10
    leak_tol: float = 1e-10
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        for name in ("quad_tol", "solver_tol", "leak_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.mode_cutoff not in (1, 2):
            raise ConfigError("mode_cutoff must be 1 or 2")
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        if self.alpha < 0 or self.alpha_min < 0 or self.alpha_max < self.alpha_min:
            raise ConfigError("alpha values must be >= 0 with alpha_min <= alpha_max")
        for name in ("alpha_steps", "n_steps", "n_z", "n_phi", "orbit_points", "scan_steps"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be >= 2")
        if self.t_max <= 0 or self.energy_window <= 0:
            raise ConfigError("t_max and energy_window must be positive")
        if not self.n_list or min(self.n_list) < 1:
            raise ConfigError("n_list must hold positive integers")
        if self.ladder_method not in ("auto", "quadrature", "asymptotic"):
            raise ConfigError(f"unknown ladder_method {self.ladder_method!r}")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def dumps(self) -> str:
        return "".join(f"{k} = {_format(v)}\n" for k, v in self.items())

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps())
        return path


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    return str(v)


_HINTS = get_type_hints(ExperimentConfig)


def _int(text: str) -> int:
    """Integers, also in exact scientific notation such as 1e23."""
    try:
        d = Decimal(text)
    except InvalidOperation as exc:
        raise ValueError(text) from exc
    if d != d.to_integral_value():
        raise ValueError(text)
    return int(d)


def _convert(key: str, text: str):
    kind = _HINTS[key]
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return _int(text)
        if kind is float:
            return float(text)
        if kind is str:
            return text
        # tuples
        inner = kind.__args__[0]
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        return tuple(_int(p) if inner is int else inner(p) for p in parts)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_config(text: str, overrides=(), **base) -> ExperimentConfig:
    """Parse ``key = value`` lines, then apply ``key=value`` overrides (later wins)."""
    values = dict(base)
    lines = [(n, line) for n, line in enumerate(text.splitlines(), 1)]
    lines += [(f"--set {i}", o) for i, o in enumerate(overrides, 1)]
    for where, raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {where}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _HINTS:
            raise ConfigError(f"line {where}: unknown key {key!r}")
        values[key] = _convert(key, val)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, overrides=(), **base) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, overrides, **base)
