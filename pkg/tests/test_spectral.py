import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm
from scipy.integrate import quad

from equiwalk import spectral
from equiwalk.errors import NumericalError, ValidationError

from conftest import random_hermitian, random_state


def test_cycle_levels_and_multiplicities():
    # 4-cycle: eigenvalues 2, 0, 0, -2
    H = np.roll(np.eye(4), 1, 0) + np.roll(np.eye(4), -1, 0)
    dec = spectral.eigendecompose(H)
    np.testing.assert_allclose(dec.energies, [-2, 0, 2], atol=1e-12)
    assert list(dec.multiplicities) == [1, 2, 1]
    P = sum(dec.projector(k) for k in range(len(dec)))
    np.testing.assert_allclose(P, np.eye(4), atol=1e-12)


def test_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        spectral.eigendecompose(np.array([[0, 1], [0, 0]], float))


def test_rejects_oversized():
    with pytest.raises(ValidationError):
        spectral.eigendecompose(np.zeros((spectral.MAX_DIM + 1, 1)))


def test_grouping_tolerance_merges_near_degenerate():
    H = np.diag([0.0, 1e-12, 1.0])
    assert len(spectral.eigendecompose(H)) == 2
    assert len(spectral.eigendecompose(H, grouping_tolerance=1e-14)) == 3


def test_projectors_check_passes(rng):
    dec = spectral.eigendecompose(random_hermitian(rng, 12))
    spectral.check_projectors(dec)


def test_evolve_matches_expm(rng):
    H = random_hermitian(rng, 10)
    psi = random_state(rng, 10)
    dec = spectral.eigendecompose(H)
    np.testing.assert_allclose(spectral.evolve(dec, psi, 1.7), expm(-1.7j * H) @ psi, atol=1e-12)


def test_kappa_small_argument_continuity():
    w = np.array([0.0, 1e-9, 1e-7, 1e-5, 0.3])
    ref = np.array([1.0] + [np.expm1(2j * x) / (2j * x) for x in w[1:]])
    np.testing.assert_allclose(spectral.kappa(w, 2.0), ref, rtol=1e-12)


def test_finite_time_average_against_scipy_quad(rng):
    H = random_hermitian(rng, 6)
    psi = random_state(rng, 6)
    a = rng.uniform(-1, 1, 6)
    dec = spectral.eigendecompose(H)
    T = 3.0
    f = lambda t: spectral.instantaneous_expectation(dec, psi, a, t).real
    ref = quad(f, 0, T, limit=200, epsabs=1e-13)[0] / T
    assert abs(spectral.time_averaged_expectation(dec, psi, a, T) - ref) < 1e-10


def test_windowed_average_against_quad(rng):
    H = random_hermitian(rng, 5)
    psi = random_state(rng, 5)
    a = rng.uniform(-1, 1, 5)
    dec = spectral.eigendecompose(H)
    f = lambda t: spectral.instantaneous_expectation(dec, psi, a, t).real
    ref = quad(f, 4.0, 5.0, epsabs=1e-13)[0]
    assert abs(spectral.windowed_time_average_expectation(dec, psi, a, 5.0) - ref) < 1e-10


def test_matrix_observable_equals_diagonal_vector(rng):
    dec = spectral.eigendecompose(random_hermitian(rng, 7))
    psi = random_state(rng, 7)
    a = rng.uniform(size=7)
    v1 = spectral.infinite_time_average_expectation(dec, psi, a)
    v2 = spectral.infinite_time_average_expectation(dec, psi, np.diag(a))
    assert abs(v1 - v2) < 1e-13


def test_zero_energy_projection():
    H = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], float)  # path P3, has eigenvalue 0
    dec = spectral.eigendecompose(H)
    e = np.array([1, 0, 0], complex)
    # zero mode (1, 0, -1)/sqrt(2)
    assert abs(spectral.zero_energy_projection_average(dec, e, e) - 0.5) < 1e-12


@given(st.integers(2, 16), st.integers(0, 2**31 - 1), st.floats(-50, 50))
def test_unitarity_and_mass_conservation(dim, seed, t):
    rng = np.random.default_rng(seed)
    dec = spectral.eigendecompose(random_hermitian(rng, dim))
    psi = random_state(rng, dim)
    out = spectral.evolve(dec, psi, t)
    assert abs(np.linalg.norm(out) - 1) < 1e-12
    dens = spectral.infinite_time_average_density(dec, psi)
    assert abs(dens.sum() - 1) < 1e-12 and np.all(dens >= -1e-15)


@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_constant_observable_average_is_norm(dim, seed):
    rng = np.random.default_rng(seed)
    dec = spectral.eigendecompose(random_hermitian(rng, dim))
    psi = random_state(rng, dim)
    assert abs(spectral.infinite_time_average_expectation(dec, psi, np.ones(dim)) - 1) < 1e-12
    assert abs(spectral.time_averaged_expectation(dec, psi, np.ones(dim), 7.3) - 1) < 1e-12


def test_five_cycle_return_density():
    # |P_k delta_0(0)|^2 summed: (1/5)^2 + 2 (2/5)^2 = 9/25
    H = np.roll(np.eye(5), 1, 0) + np.roll(np.eye(5), -1, 0)
    dec = spectral.eigendecompose(H)
    dens = spectral.infinite_time_average_density(dec, np.eye(5)[0])
    assert abs(dens[0] - 9 / 25) < 1e-14
    np.testing.assert_allclose(dens[1:], (1 - 9 / 25) / 4, atol=1e-14)
