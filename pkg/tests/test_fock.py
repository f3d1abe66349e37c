import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from fockstab import fock
from fockstab.errors import (
    DegenerateCollapseError,
    DimensionMismatchError,
    InvalidArgumentError,
    InvalidDimensionError,
)
from fockstab.fock import Outcome

from conftest import PAPER_PHI, PAPER_THETA, random_states


def test_annihilation_entries():
    a = fock.make_annihilation(3)
    expected = np.zeros((3, 3))
    expected[0, 1] = 1
    expected[1, 2] = math.sqrt(2)
    np.testing.assert_array_equal(a, expected)


def test_annihilation_action():
    np.testing.assert_allclose(fock.make_annihilation(2) @ fock.basis_state(2, 1), [1, 0])
    assert not np.any(fock.make_annihilation(21) @ fock.basis_state(21, 0))


@pytest.mark.parametrize("dim", [1, 0, -3])
def test_invalid_dimension(dim):
    with pytest.raises(InvalidDimensionError):
        fock.make_annihilation(dim)
    with pytest.raises(InvalidDimensionError):
        fock.make_number(dim)


@pytest.mark.parametrize("dim", [2, 3, 4, 21])
def test_number_operator_is_adag_a(dim):
    a = fock.make_annihilation(dim)
    # sqrt(n)**2 rounds, so equality holds to the last bit only
    np.testing.assert_allclose(fock.make_number(dim), a.conj().T @ a, rtol=0, atol=1e-14)


def test_number_eigenvalues():
    np.testing.assert_array_equal(fock.make_number(3).diagonal(), [0, 1, 2])
    psi = fock.basis_state(21, 5)
    np.testing.assert_array_equal(fock.make_number(21) @ psi, 5 * psi)


def test_cached_operators_are_read_only():
    with pytest.raises(ValueError):
        fock.make_annihilation(4)[0, 1] = 7


def test_measurement_pair_paper_preset():
    pair = fock.make_measurement_pair(21, PAPER_THETA, PAPER_PHI)
    assert pair.cos_diag[3] == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert np.allclose(pair.m_g, np.diag(pair.m_g.diagonal()))
    assert not np.any(pair.m_g.imag) and not np.any(pair.m_e.imag)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_measurement_pair_completeness(theta, phi):
    pair = fock.make_measurement_pair(12, theta, phi)
    np.testing.assert_allclose(pair.m_g @ pair.m_g + pair.m_e @ pair.m_e, np.eye(12), atol=1e-12)


def test_measurement_pair_trivial():
    pair = fock.make_measurement_pair(5, 0.0, 0.0)
    np.testing.assert_array_equal(pair.m_g, np.eye(5))
    np.testing.assert_array_equal(pair.m_e, np.zeros((5, 5)))


def test_displacement_zero_is_identity():
    np.testing.assert_array_equal(fock.displacement(21, 0.0), np.eye(21))


@pytest.mark.parametrize("alpha", [-1.0, -0.37, 0.1, 0.5, 1.0])
@pytest.mark.parametrize("dim", [2, 10, 21])
def test_displacement_matches_scipy_expm(dim, alpha):
    a = fock.make_annihilation(dim)
    oracle = scipy.linalg.expm(alpha * (a.conj().T - a))
    np.testing.assert_allclose(fock.displacement(dim, alpha), oracle, atol=1e-12)


def test_displacement_vacuum_overlap():
    d = fock.displacement(21, 0.1)
    assert abs(d[0, 0]) ** 2 == pytest.approx(0.9900498337491681, abs=1e-8)


@pytest.mark.parametrize("alpha", np.linspace(-1, 1, 9))
def test_displacement_orthogonal(alpha):
    d = fock.displacement(21, alpha)
    assert not np.any(d.imag)
    np.testing.assert_allclose(d.T @ d, np.eye(21), atol=1e-10)


def test_displacement_inverse():
    prod = fock.displacement(21, 0.1) @ fock.displacement(21, -0.1)
    np.testing.assert_allclose(prod, np.eye(21), atol=1e-10)


@settings(max_examples=50)
@given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
def test_displacement_group_property(alpha, beta):
    lhs = fock.displacement(21, alpha) @ fock.displacement(21, beta)
    np.testing.assert_allclose(lhs, fock.displacement(21, alpha + beta), atol=1e-8)


def test_displacement_rejects_non_finite():
    with pytest.raises(InvalidArgumentError):
        fock.displacement(5, float("nan"))
    with pytest.raises(InvalidArgumentError):
        fock.displace(fock.basis_state(5, 0), float("inf"))


def test_displace_matches_matrix(rng):
    for psi in random_states(rng, 21, 5):
        np.testing.assert_allclose(fock.displace(psi, 0.3), fock.displacement(21, 0.3) @ psi, atol=1e-13)


def test_displacement_norm_preservation(rng):
    states = random_states(rng, 21, 100)
    for alpha in np.linspace(-1, 1, 21):
        norms = np.linalg.norm(states @ fock.displacement(21, alpha).T, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-9)


def test_coherent_state():
    np.testing.assert_array_equal(fock.coherent_state(21, 0.0), fock.basis_state(21, 0))
    psi = fock.coherent_state(21, 3.0)
    assert abs(psi[3]) ** 2 == pytest.approx(0.22404180765538775, abs=1e-6)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        fock.coherent_state(21, -1.0)


def test_coherent_state_is_displaced_vacuum():
    # D_alpha |0> is the coherent state of amplitude alpha, up to truncation
    psi = fock.displace(fock.basis_state(40, 0), math.sqrt(3.0))
    np.testing.assert_allclose(psi[:21], fock.coherent_state(21, 3.0), atol=1e-6)


def test_measure_fock_state_is_stable():
    pair = fock.make_measurement_pair(21, PAPER_THETA, PAPER_PHI)
    psi = fock.basis_state(21, 3)
    p_g, p_e = fock.outcome_probabilities(psi, pair)
    assert p_g == pytest.approx(0.5, abs=1e-15)
    for u, expected in [(0.1, Outcome.G), (0.49, Outcome.G), (0.51, Outcome.E), (0.99, Outcome.E)]:
        outcome, post = fock.measure_step(psi, pair, u)
        assert outcome is expected
        np.testing.assert_allclose(np.abs(post), np.abs(psi), atol=1e-15)


@pytest.mark.parametrize("n", range(10))
def test_every_fock_state_is_an_eigenvector(n):
    pair = fock.make_measurement_pair(10, PAPER_THETA, PAPER_PHI)
    psi = fock.basis_state(10, n)
    for u in (0.0, 0.999):
        _, post = fock.measure_step(psi, pair, u)
        np.testing.assert_allclose(np.abs(post), np.abs(psi), atol=1e-15)


def test_measure_identity_pair(rng):
    pair = fock.make_measurement_pair(6, 0.0, 0.0)
    psi = random_states(rng, 6, 1)[0]
    outcome, post = fock.measure_step(psi, pair, 0.3)
    assert outcome is Outcome.G
    np.testing.assert_allclose(post, psi, atol=1e-15)


def test_measure_superposition():
    pair = fock.make_measurement_pair(21, PAPER_THETA, PAPER_PHI)
    psi = np.zeros(21, dtype=complex)
    psi[:2] = 1 / math.sqrt(2)
    c0, c1 = math.cos(PAPER_THETA), math.cos(PAPER_THETA + PAPER_PHI)
    p_g, p_e = fock.outcome_probabilities(psi, pair)
    assert p_g == pytest.approx((c0**2 + c1**2) / 2, abs=1e-15)
    outcome, post = fock.measure_step(psi, pair, 0.0)
    assert outcome is Outcome.G
    np.testing.assert_allclose(post[:2], np.array([c0, c1]) / math.hypot(c0, c1), atol=1e-15)


def test_probability_completeness(rng):
    pair = fock.make_measurement_pair(21, PAPER_THETA, PAPER_PHI)
    for psi in random_states(rng, 21, 1000):
        p_g, p_e = fock.outcome_probabilities(psi, pair)
        assert abs(p_g + p_e - 1) < 1e-12


def test_degenerate_collapse():
    pair = fock.make_measurement_pair(4, math.pi / 2, 0.0)
    with pytest.raises(DegenerateCollapseError):
        fock.collapse(fock.basis_state(4, 1), pair, Outcome.G)


def test_measure_rejects_bad_draw_and_dim():
    pair = fock.make_measurement_pair(4, 0.3, 0.2)
    with pytest.raises(InvalidArgumentError):
        fock.measure_step(fock.basis_state(4, 0), pair, 1.0)
    with pytest.raises(DimensionMismatchError):
        fock.measure_step(fock.basis_state(5, 0), pair, 0.5)


def test_fidelity_to_fock():
    psi = fock.basis_state(21, 3)
    assert fock.fidelity_to_fock(psi, 3) == 1
    assert fock.fidelity_to_fock(psi, 2) == 0
    assert fock.fidelity_to_fock(fock.coherent_state(21, 3), 3) == pytest.approx(0.224042, abs=1e-6)
    with pytest.raises(InvalidArgumentError):
        fock.fidelity_to_fock(psi, 21)


def test_as_state_validation():
    with pytest.raises(InvalidArgumentError):
        fock.as_state([1.0, float("nan")])
    with pytest.raises(InvalidDimensionError):
        fock.as_state([1.0])
