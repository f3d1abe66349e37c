"""Experiment configuration and its validation."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, DegenerateMeasurementError
from .fock import measurement_angles

PRESETS = ("paper-fig2",)
LAWS = ("lyapunov", "finite-dim")
GAP_TOL = 1e-9


def preset_angles(name: str, n_bar: int) -> tuple[float, float]:
    """(theta, phi) for a named preset.

    ``paper-fig2`` gives M_g = cos(sqrt(2) (N - n_bar) / 5 + pi / 4).
    """
    if name != "paper-fig2":
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {PRESETS}")
    phi = math.sqrt(2) / 5
    return math.pi / 4 - n_bar * phi, phi


@dataclass(frozen=True)
class ExperimentConfig:
    n_bar: int = 3
    system_dim: int = 21
    filter_dim: int = 10
    theta: float = math.pi / 4 - 3 * math.sqrt(2) / 5
    phi: float = math.sqrt(2) / 5
    alpha_bar: float = 0.1
    delta: float = 1 / 220
    fd_step: float = 1e-3
    law: str = "lyapunov"
    horizon: int = 200
    trajectories: int = 100
    master_seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return validate_config({**self.to_dict(), **changes})


FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _as_int(raw: dict, name: str) -> int:
    value = raw[name]
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return int(value)


def _as_float(raw: dict, name: str) -> float:
    value = raw[name]
    if isinstance(value, bool):
        raise ConfigError(name, f"expected a number, got {value!r}")
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, got {raw[name]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    return value


def check_nondegenerate(theta: float, phi: float, levels: int) -> None:
    """Reject measurements whose g-probabilities collide for two photon numbers < levels."""
    probs = np.cos(measurement_angles(levels, theta, phi)) ** 2
    order = np.argsort(probs, kind="stable")
    gaps = np.diff(probs[order])
    if gaps.size and gaps.min() <= GAP_TOL:
        k = int(np.argmin(gaps))
        i, j = sorted((int(order[k]), int(order[k + 1])))
        raise DegenerateMeasurementError(
            "phi",
            f"photon numbers {i} and {j} have indistinguishable detection "
            f"probabilities ({probs[i]:.12g} vs {probs[j]:.12g})",
        )


def validate_config(raw: dict[str, Any]) -> ExperimentConfig:
    """Build a validated config from a mapping.

    ``preset`` may replace explicit theta/phi. Unknown keys are rejected.
    """
    raw = dict(raw)
    unknown = set(raw) - set(FIELDS) - {"preset"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration field")

    defaults = ExperimentConfig()
    merged = {name: raw.get(name, getattr(defaults, name)) for name in FIELDS}
    n_bar = _as_int(merged, "n_bar")
    preset = raw.get("preset")
    if preset is not None:
        if "theta" in raw or "phi" in raw:
            raise ConfigError("preset", "give either a preset or theta/phi, not both")
        merged["theta"], merged["phi"] = preset_angles(preset, n_bar)

    values: dict[str, Any] = {"n_bar": n_bar}
    for name in ("system_dim", "filter_dim", "horizon", "trajectories", "master_seed"):
        values[name] = _as_int(merged, name)
    for name in ("theta", "phi", "alpha_bar", "delta", "fd_step"):
        values[name] = _as_float(merged, name)
    values["law"] = str(merged["law"])

    if values["n_bar"] < 0:
        raise ConfigError("n_bar", "must be >= 0")
    if not values["filter_dim"] > values["n_bar"] + 1:
        raise ConfigError("filter_dim", f"must exceed n_bar + 1 = {values['n_bar'] + 1}")
    if not values["system_dim"] > values["filter_dim"]:
        raise ConfigError("system_dim", "must exceed filter_dim")
    if values["alpha_bar"] <= 0:
        raise ConfigError("alpha_bar", "must be > 0")
    if values["delta"] < 0:
        raise ConfigError("delta", "must be >= 0")
    if not 0 < values["fd_step"] <= values["alpha_bar"] / 10:
        raise ConfigError("fd_step", "must lie in (0, alpha_bar/10]")
    if values["law"] not in LAWS:
        raise ConfigError("law", f"must be one of {LAWS}")
    if values["horizon"] < 0:
        raise ConfigError("horizon", "must be >= 0")
    if values["trajectories"] < 1:
        raise ConfigError("trajectories", "must be >= 1")
    if not 0 <= values["master_seed"] < 2**64:
        raise ConfigError("master_seed", "must be a 64-bit unsigned integer")

    check_nondegenerate(values["theta"], values["phi"], values["filter_dim"])
    return ExperimentConfig(**values)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML mapping."""
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} does not contain a mapping")
    return data
