"""Closed-loop Monte Carlo trajectories: measure, filter, control, displace."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import fock, lyapunov
from .config import ExperimentConfig
from .errors import FilterDivergenceError
from .estimator import FilterState, filter_collapse, filter_displace, filter_init
from .fock import Outcome

ESCAPE_THRESHOLD = 0.5
HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class StepRecord:
    step: int
    outcome: Outcome | None
    alpha: float | None
    fidelity_true: float
    fidelity_filter: float
    lyapunov_filter: float


@dataclass(frozen=True)
class TrajectoryRecord:
    traj_index: int
    master_seed: int
    steps: tuple[StepRecord, ...]
    terminal_status: str = "completed"
    diagnostic: str | None = None

    @property
    def final_fidelity(self) -> float:
        return self.steps[-1].fidelity_true


@dataclass(frozen=True)
class ClosedLoop:
    """Everything a step needs besides the two states and the random draw."""

    law: lyapunov.Law
    params: lyapunov.ControlParams
    filter_sigma: lyapunov.SigmaTable

    def record(self, k, outcome, alpha, sys_state, fs: FilterState) -> StepRecord:
        n_bar = self.params.n_bar
        return StepRecord(
            step=k,
            outcome=outcome,
            alpha=alpha,
            fidelity_true=fock.fidelity_to_fock(sys_state, n_bar),
            fidelity_filter=fock.fidelity_to_fock(fs.state, n_bar),
            lyapunov_filter=lyapunov.lyapunov_value(fs.state, self.filter_sigma, self.params),
        )


def build_loop(config: ExperimentConfig, law: str | None = None) -> ClosedLoop:
    params = lyapunov.ControlParams(
        alpha_bar=config.alpha_bar,
        delta=config.delta,
        n_bar=config.n_bar,
        theta=config.theta,
        phi=config.phi,
        fd_step=config.fd_step,
    )
    sigma = lyapunov.sigma_table(config.n_bar, config.filter_dim)
    law = law or config.law
    if law == "lyapunov":
        control = lyapunov.LyapunovLaw(params, sigma)
    elif law == "finite-dim":
        control = lyapunov.FiniteDimLaw(config.n_bar, config.alpha_bar)
    else:
        raise ValueError(f"unknown law {law!r}")
    return ClosedLoop(control, params, sigma)


def step(
    sys_state: np.ndarray, fs: FilterState, loop: ClosedLoop, u: float, k: int = 1
) -> tuple[np.ndarray, FilterState, StepRecord]:
    """One measurement + feedback cycle.

    The outcome is sampled from the true state; the control only sees the filter.
    """
    pair = fock.make_measurement_pair(sys_state.shape[0], fs.theta, fs.phi)
    outcome, sys_half = fock.measure_step(sys_state, pair, u)
    fs_half = filter_collapse(fs, outcome)
    alpha = float(loop.law(fs_half.state))
    sys_next = fock.displace(sys_half, alpha)
    fs_next = filter_displace(fs_half, alpha)
    return sys_next, fs_next, loop.record(k, outcome, alpha, sys_next, fs_next)


def trajectory_rng(master_seed: int, traj_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(traj_index,))
    return np.random.Generator(np.random.Philox(seq))


def run_trajectory(config: ExperimentConfig, traj_index: int, law: str | None = None) -> TrajectoryRecord:
    loop = build_loop(config, law)
    rng = trajectory_rng(config.master_seed, traj_index)
    sys_state = fock.coherent_state(config.system_dim, config.n_bar)
    fs = filter_init(config.filter_dim, config.n_bar, config.theta, config.phi)
    records = [loop.record(0, None, None, sys_state, fs)]
    status, diagnostic = "completed", None
    for k in range(1, config.horizon + 1):
        try:
            sys_state, fs, rec = step(sys_state, fs, loop, rng.random(), k)
        except FilterDivergenceError as exc:
            status, diagnostic = "filter-divergence", f"step {k}: {exc}"
            break
        records.append(rec)
    return TrajectoryRecord(traj_index, config.master_seed, tuple(records), status, diagnostic)


@dataclass(frozen=True)
class EnsembleSummary:
    law: str
    mean_fidelity_per_step: list[float | None]
    mean_filter_fidelity_per_step: list[float | None]
    final_fidelity_histogram: list[int]
    escape_fraction: float
    divergence_count: int
    config: ExperimentConfig
    trajectories: tuple[TrajectoryRecord, ...] = field(repr=False, default=())

    @property
    def mean_final_fidelity(self) -> float:
        return float(np.mean([t.final_fidelity for t in self.trajectories]))


def _mean_series(trajs, attr: str, length: int) -> list[float | None]:
    # diverged trajectories drop out of the average after they stop
    out = []
    for k in range(length):
        vals = [getattr(t.steps[k], attr) for t in trajs if len(t.steps) > k]
        out.append(float(np.mean(vals)) if vals else None)
    return out


def summarize(config: ExperimentConfig, trajs: list[TrajectoryRecord], law: str | None = None) -> EnsembleSummary:
    trajs = sorted(trajs, key=lambda t: t.traj_index)
    finals = np.array([t.final_fidelity for t in trajs])
    hist, _ = np.histogram(finals, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    length = config.horizon + 1
    return EnsembleSummary(
        law=law or config.law,
        mean_fidelity_per_step=_mean_series(trajs, "fidelity_true", length),
        mean_filter_fidelity_per_step=_mean_series(trajs, "fidelity_filter", length),
        final_fidelity_histogram=[int(x) for x in hist],
        escape_fraction=float(np.mean(finals < ESCAPE_THRESHOLD)),
        divergence_count=sum(t.terminal_status != "completed" for t in trajs),
        config=config,
        trajectories=tuple(trajs),
    )


def run_ensemble(config: ExperimentConfig, workers: int = 1, law: str | None = None) -> EnsembleSummary:
    """Run trajectories 0..N-1; the result does not depend on ``workers``."""
    job = partial(run_trajectory, config, law=law)
    indices = range(config.trajectories)
    if workers <= 1:
        trajs = [job(i) for i in indices]
    else:
        chunk = max(1, config.trajectories // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajs = list(pool.map(job, indices, chunksize=chunk))
    return summarize(config, trajs, law)
