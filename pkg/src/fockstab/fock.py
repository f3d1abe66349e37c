"""Truncated Fock-space linear algebra.

States are complex numpy vectors indexed by photon number; operators are
dense complex matrices. Everything returned from here is a fresh array or a
read-only cached one, so values can be shared between workers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateCollapseError,
    DimensionMismatchError,
    InvalidArgumentError,
    InvalidDimensionError,
)

NORM_TOL = 1e-9
COLLAPSE_TOL = 1e-12


class Outcome(str, enum.Enum):
    """Detected atom level."""

    G = "g"
    E = "e"


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


def as_state(amplitudes) -> np.ndarray:
    """Validate and copy amplitudes into a complex state vector (not renormalized)."""
    psi = np.array(amplitudes, dtype=complex)
    if psi.ndim != 1:
        raise InvalidArgumentError("state must be one-dimensional")
    _check_dim(psi.shape[0])
    if not np.all(np.isfinite(psi)):
        raise InvalidArgumentError("state has non-finite amplitudes")
    return psi


def normalize(psi: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(psi)
    if norm == 0.0 or not np.isfinite(norm):
        raise InvalidArgumentError("cannot normalize a zero or non-finite vector")
    return psi / norm


def basis_state(dim: int, n: int) -> np.ndarray:
    """The Fock state |n> in a space of dimension ``dim``."""
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidArgumentError(f"photon number {n} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return psi


@lru_cache(maxsize=None)
def make_annihilation(dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    a = np.zeros((dim, dim), dtype=complex)
    n = np.arange(1, dim)
    a[n - 1, n] = np.sqrt(n)
    return _frozen(a)


def make_creation(dim: int) -> np.ndarray:
    return make_annihilation(dim).conj().T


@lru_cache(maxsize=None)
def make_number(dim: int) -> np.ndarray:
    # a^dag a is exactly diag(0..dim-1) in the truncated space as well
    dim = _check_dim(dim)
    return _frozen(np.diag(np.arange(dim, dtype=float)).astype(complex))


@dataclass(frozen=True)
class MeasurementPair:
    """Diagonal QND measurement operators M_g = cos(theta + N phi), M_e = sin(...)."""

    m_g: np.ndarray
    m_e: np.ndarray
    theta: float
    phi: float

    @property
    def dim(self) -> int:
        return self.m_g.shape[0]

    @property
    def cos_diag(self) -> np.ndarray:
        return self.m_g.diagonal().real

    @property
    def sin_diag(self) -> np.ndarray:
        return self.m_e.diagonal().real


def measurement_angles(dim: int, theta: float, phi: float) -> np.ndarray:
    """phi_n = theta + n phi for n = 0..dim-1."""
    return theta + np.arange(dim) * phi


@lru_cache(maxsize=256)
def make_measurement_pair(dim: int, theta: float, phi: float) -> MeasurementPair:
    dim = _check_dim(dim)
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise InvalidArgumentError("theta and phi must be finite")
    angles = measurement_angles(dim, theta, phi)
    m_g = _frozen(np.diag(np.cos(angles)).astype(complex))
    m_e = _frozen(np.diag(np.sin(angles)).astype(complex))
    return MeasurementPair(m_g=m_g, m_e=m_e, theta=float(theta), phi=float(phi))


@lru_cache(maxsize=None)
def _generator_eigensystem(dim: int) -> tuple[np.ndarray, np.ndarray]:
    # a^dag - a is real antisymmetric, so i(a^dag - a) is Hermitian:
    # exp(alpha (a^dag - a)) = U diag(exp(-i alpha lam)) U^dag
    a = make_annihilation(dim)
    herm = 1j * (a.conj().T - a)
    lam, vecs = np.linalg.eigh(herm)
    return _frozen(lam), _frozen(vecs)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise InvalidArgumentError(f"displacement amplitude must be finite, got {alpha}")
    return alpha


def displacement(dim: int, alpha: float) -> np.ndarray:
    """Displacement operator exp(alpha (a^dag - a)) of the truncated generator."""
    dim = _check_dim(dim)
    alpha = _check_alpha(alpha)
    if alpha == 0.0:
        return np.eye(dim, dtype=complex)
    lam, vecs = _generator_eigensystem(dim)
    d = (vecs * np.exp(-1j * alpha * lam)) @ vecs.conj().T
    # the exponential of a real matrix is real
    return d.real.astype(complex)


def displace(psi: np.ndarray, alpha: float) -> np.ndarray:
    """Apply D_alpha to a state without forming the matrix."""
    alpha = _check_alpha(alpha)
    if alpha == 0.0:
        return psi.copy()
    lam, vecs = _generator_eigensystem(_check_dim(psi.shape[0]))
    return vecs @ (np.exp(-1j * alpha * lam) * (vecs.conj().T @ psi))


def coherent_state(dim: int, mean: float) -> np.ndarray:
    """Coherent state with real amplitude sqrt(mean), truncated and renormalized."""
    dim = _check_dim(dim)
    if not (math.isfinite(mean) and mean >= 0):
        raise InvalidArgumentError(f"mean photon number must be >= 0, got {mean}")
    if mean == 0:
        return basis_state(dim, 0)
    n = np.arange(dim)
    log_amp = 0.5 * (n * math.log(mean) - np.array([math.lgamma(k + 1) for k in n]))
    amp = np.exp(log_amp - log_amp.max())
    return normalize(amp.astype(complex))


def _check_same_dim(psi: np.ndarray, dim: int) -> None:
    if psi.shape[0] != dim:
        raise DimensionMismatchError(f"state has dimension {psi.shape[0]}, operator {dim}")


def outcome_probabilities(psi: np.ndarray, pair: MeasurementPair) -> tuple[float, float]:
    _check_same_dim(psi, pair.dim)
    weights = np.abs(psi) ** 2
    p_g = float(weights @ pair.cos_diag**2)
    p_e = float(weights @ pair.sin_diag**2)
    return p_g, p_e


def collapse(psi: np.ndarray, pair: MeasurementPair, outcome: Outcome) -> np.ndarray:
    """Post-measurement state M_s psi / ||M_s psi||."""
    _check_same_dim(psi, pair.dim)
    diag = pair.cos_diag if Outcome(outcome) is Outcome.G else pair.sin_diag
    branch = diag * psi
    norm = np.linalg.norm(branch)
    if norm < COLLAPSE_TOL:
        raise DegenerateCollapseError(
            f"outcome {Outcome(outcome).value} has branch norm {norm:.3e}"
        )
    return branch / norm


def measure_step(
    psi: np.ndarray, pair: MeasurementPair, u: float
) -> tuple[Outcome, np.ndarray]:
    """Sample one QND measurement: outcome g iff u < p_g."""
    if not 0.0 <= u < 1.0:
        raise InvalidArgumentError(f"uniform draw must lie in [0, 1), got {u}")
    p_g, _ = outcome_probabilities(psi, pair)
    outcome = Outcome.G if u < p_g else Outcome.E
    return outcome, collapse(psi, pair, outcome)


def fidelity_to_fock(psi: np.ndarray, n: int) -> float:
    if not 0 <= n < psi.shape[0]:
        raise InvalidArgumentError(f"photon number {n} outside 0..{psi.shape[0] - 1}")
    return float(abs(psi[n]) ** 2)
