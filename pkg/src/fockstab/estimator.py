"""Pure-state quantum filter on a truncation smaller than the simulated cavity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import ConfigError, DegenerateCollapseError, FilterDivergenceError
from .fock import Outcome


@dataclass(frozen=True)
class FilterState:
    state: np.ndarray
    theta: float
    phi: float

    @property
    def filter_dim(self) -> int:
        return self.state.shape[0]


def filter_init(filter_dim: int, n_bar: int, theta: float, phi: float) -> FilterState:
    """Coherent state of mean ``n_bar`` photons, truncated to the filter dimension."""
    if filter_dim < n_bar + 2:
        raise ConfigError("filter_dim", f"must be at least n_bar + 2 = {n_bar + 2}, got {filter_dim}")
    return FilterState(fock.coherent_state(filter_dim, n_bar), float(theta), float(phi))


def filter_collapse(fs: FilterState, outcome: Outcome) -> FilterState:
    pair = fock.make_measurement_pair(fs.filter_dim, fs.theta, fs.phi)
    try:
        half = fock.collapse(fs.state, pair, outcome)
    except DegenerateCollapseError as exc:
        raise FilterDivergenceError(f"filter rejects observed outcome: {exc}") from exc
    return FilterState(half, fs.theta, fs.phi)


def filter_displace(fs: FilterState, alpha: float) -> FilterState:
    return FilterState(fock.displace(fs.state, alpha), fs.theta, fs.phi)


def filter_update(fs: FilterState, outcome: Outcome, alpha: float) -> FilterState:
    return filter_displace(filter_collapse(fs, outcome), alpha)
