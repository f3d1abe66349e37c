"""Lyapunov function for Fock-state stabilization and the two feedback laws.

The Lyapunov function combines an unbounded photon-number weighting
``sum_n sigma_n |c_n|^2`` (zero only at the target) with a small measurement
term that makes every Fock state a strict critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import fock
from .errors import DimensionMismatchError, InvalidArgumentError
from .fock import MeasurementPair, Outcome

TIE_TOL = 1e-14
FIDELITY_SWITCH = 0.1


def sigma_exact(n_bar: int, n: int) -> Fraction:
    """Weight of photon number ``n`` for target ``n_bar`` as an exact rational."""
    if n < 0:
        return Fraction(0)
    if n == n_bar:
        return Fraction(0)
    if n == 0:
        return Fraction(1, 8) + sum(
            (Fraction(1, k) - Fraction(1, k * k) for k in range(1, n_bar + 1)), Fraction(0)
        )
    if n < n_bar:
        return sum((Fraction(1, k) - Fraction(1, k * k) for k in range(n + 1, n_bar + 1)), Fraction(0))
    return sum((Fraction(1, k) + Fraction(1, k * k) for k in range(n_bar + 1, n + 1)), Fraction(0))


@dataclass(frozen=True)
class SigmaTable:
    target: int
    values: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def extended(self, length: int) -> np.ndarray:
        """Weights for photon numbers 0..length-1, continuing past the table edge."""
        if length <= self.dim:
            return self.values[:length]
        tail = [float(sigma_exact(self.target, n)) for n in range(self.dim, length)]
        return np.concatenate([self.values, tail])


def sigma_table(n_bar: int, dim: int) -> SigmaTable:
    if int(dim) != dim or dim < 2:
        raise InvalidArgumentError(f"dimension must be >= 2, got {dim}")
    if not 0 <= n_bar < dim:
        raise InvalidArgumentError(f"target {n_bar} outside 0..{dim - 1}")
    values = np.array([float(sigma_exact(n_bar, n)) for n in range(dim)])
    values.setflags(write=False)
    return SigmaTable(target=int(n_bar), values=values)


@dataclass(frozen=True)
class ControlParams:
    """Controller configuration.

    ``fd_step`` is the half-width of the three-point quadratic fit; it defaults
    to alpha_bar / 100.
    """

    alpha_bar: float
    delta: float
    n_bar: int
    theta: float
    phi: float
    fd_step: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha_bar) and self.alpha_bar > 0):
            raise InvalidArgumentError("alpha_bar must be > 0")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise InvalidArgumentError("delta must be >= 0")
        if self.n_bar < 0:
            raise InvalidArgumentError("n_bar must be >= 0")
        if self.fd_step is None:
            object.__setattr__(self, "fd_step", self.alpha_bar / 100)
        if not (0 < self.fd_step <= self.alpha_bar / 10):
            raise InvalidArgumentError("fd_step must lie in (0, alpha_bar/10]")


def _check(psi: np.ndarray, sigma: SigmaTable) -> None:
    if psi.shape[0] != sigma.dim:
        raise DimensionMismatchError(
            f"state has dimension {psi.shape[0]}, sigma table {sigma.dim}"
        )


def lyapunov_value(psi: np.ndarray, sigma: SigmaTable, params: ControlParams) -> float:
    _check(psi, sigma)
    weights = np.abs(psi) ** 2
    pair = fock.make_measurement_pair(psi.shape[0], params.theta, params.phi)
    p_g = float(weights @ pair.cos_diag**2)
    p_e = float(weights @ pair.sin_diag**2)
    target_angle = params.theta + params.n_bar * params.phi
    c2, s2 = math.cos(target_angle) ** 2, math.sin(target_angle) ** 2
    return float(weights @ sigma.values) + params.delta * (c2 * c2 + s2 * s2 - p_g * p_g - p_e * p_e)


def vhat_value(psi: np.ndarray, sigma: SigmaTable) -> float:
    """The sigma-weighted part of the Lyapunov function alone."""
    _check(psi, sigma)
    return float(np.abs(psi) ** 2 @ sigma.values)


def vhat_derivatives(psi: np.ndarray, sigma: SigmaTable) -> tuple[float, float]:
    """First and second derivatives of alpha -> vhat(D_alpha psi) at alpha = 0.

    These are the derivatives of the untruncated displacement acting on psi,
    so the edge weight sigma_dim is taken from the continued schedule.
    """
    _check(psi, sigma)
    dim = psi.shape[0]
    c = psi
    n = np.arange(dim)
    s = sigma.extended(dim + 1)
    s_prev = np.concatenate([[0.0], s[: dim - 1]])
    s_here, s_next = s[:dim], s[1:]

    c_prev = np.concatenate([[0.0], c[:-1]])
    c_next = np.concatenate([c[1:], [0.0]])
    shifted = np.sqrt(n) * c_prev - np.sqrt(n + 1) * c_next
    d1 = 2.0 * float(np.sum(s_here * np.real(np.conj(c) * shifted)))

    diag_coeff = (n + 1) * s_next + n * s_prev - (2 * n + 1) * s_here
    cross = np.real(c_prev * np.conj(c_next)) * np.sqrt(n * (n + 1)) * (s_prev + s_next - 2 * s_here)
    d2 = 2.0 * float(np.sum(np.abs(c) ** 2 * diag_coeff) + np.sum(cross))
    return d1, d2


def curvature_coefficient(sigma: SigmaTable, n: int) -> float:
    """(n+1) sigma_{n+1} + n sigma_{n-1} - (2n+1) sigma_n."""
    s = sigma.extended(n + 2)
    prev = s[n - 1] if n >= 1 else 0.0
    return float((n + 1) * s[n + 1] + n * prev - (2 * n + 1) * s[n])


def _argmin_with_ties(candidates: list[float], values: list[float]) -> float:
    best = min(values)
    tol = TIE_TOL * max(1.0, abs(best))
    tied = [a for a, v in zip(candidates, values) if v <= best + tol]
    return min(tied, key=lambda a: (abs(a), a > 0))


def choose_alpha_lyapunov(psi: np.ndarray, sigma: SigmaTable, params: ControlParams) -> float:
    """Control minimizing V(D_alpha psi) over [-alpha_bar, alpha_bar].

    A quadratic is fitted through exact values at {-h, 0, h}; its constrained
    minimizer is then compared against 0 and both endpoints with exact
    evaluations, so the chosen control never increases V.
    """
    _check(psi, sigma)
    h, bound = params.fd_step, params.alpha_bar
    cache: dict[float, float] = {}

    def g(alpha: float) -> float:
        if alpha not in cache:
            cache[alpha] = lyapunov_value(fock.displace(psi, alpha), sigma, params)
        return cache[alpha]

    g_minus, g_zero, g_plus = g(-h), g(0.0), g(h)
    curv = (g_plus + g_minus - 2.0 * g_zero) / (2.0 * h * h)
    slope = (g_plus - g_minus) / (2.0 * h)
    if curv > 0:
        alpha_star = min(bound, max(-bound, -slope / (2.0 * curv)))
    else:
        # concave or flat: the smaller endpoint of the quadratic, ties to -bound
        alpha_star = bound if slope < 0 else -bound

    candidates = [alpha_star, 0.0, -bound, bound]
    return _argmin_with_ties(candidates, [g(a) for a in candidates])


def choose_alpha_finite_dim(psi: np.ndarray, n_bar: int, alpha_bar: float) -> float:
    """Feedback designed on a finite-dimensional model of the cavity."""
    if fock.fidelity_to_fock(psi, n_bar) <= FIDELITY_SWITCH:
        return float(alpha_bar)
    dim = psi.shape[0]
    a = fock.make_annihilation(dim)
    gen = a.conj().T - a
    proj = np.zeros((dim, dim), dtype=complex)
    proj[n_bar, n_bar] = 1.0
    expectation = np.vdot(psi, (proj @ gen - gen @ proj) @ psi)
    assert abs(expectation.imag) < 1e-10, expectation
    return float(expectation.real) / (4 * n_bar + 2)


Law = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class LyapunovLaw:
    params: ControlParams
    sigma: SigmaTable

    name = "lyapunov"

    def __call__(self, psi: np.ndarray) -> float:
        return choose_alpha_lyapunov(psi, self.sigma, self.params)


@dataclass(frozen=True)
class FiniteDimLaw:
    n_bar: int
    alpha_bar: float

    name = "finite-dim"

    def __call__(self, psi: np.ndarray) -> float:
        return choose_alpha_finite_dim(psi, self.n_bar, self.alpha_bar)


@dataclass(frozen=True)
class Drift:
    total: float
    k1: float
    k2: float


def expected_step_drift(
    psi: np.ndarray, law: Law, sigma: SigmaTable, params: ControlParams
) -> Drift:
    """Exact one-step expected change of V, summed over both outcomes.

    ``k2`` is the change due to measurement alone and ``k1`` the extra change
    contributed by the control.
    """
    _check(psi, sigma)
    pair = fock.make_measurement_pair(psi.shape[0], params.theta, params.phi)
    v0 = lyapunov_value(psi, sigma, params)
    after_control = after_measure = 0.0
    for outcome, p in zip((Outcome.G, Outcome.E), fock.outcome_probabilities(psi, pair)):
        if p < fock.COLLAPSE_TOL**2:
            continue
        half = fock.collapse(psi, pair, outcome)
        alpha = law(half)
        after_measure += p * lyapunov_value(half, sigma, params)
        after_control += p * lyapunov_value(fock.displace(half, alpha), sigma, params)
    total = after_control - v0
    k2 = after_measure - v0
    return Drift(total=total, k1=total - k2, k2=k2)


def k2_closed_form(psi: np.ndarray, pair: MeasurementPair) -> float:
    """-2 (<M_g^4> - <M_g^2>^2)^2 / (<M_g^2> <M_e^2>), without any delta factor.

    The measurement-only drift of V equals ``delta`` times this value.
    """
    weights = np.abs(psi) ** 2
    cos2 = pair.cos_diag**2
    p_g = float(weights @ cos2)
    p_e = float(weights @ pair.sin_diag**2)
    fourth = float(weights @ cos2**2)
    if p_g * p_e == 0.0:
        return 0.0
    return -2.0 * (fourth - p_g**2) ** 2 / (p_g * p_e)
