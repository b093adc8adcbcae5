import numpy as np
import pytest

from equiwalk import oracles, spectral
from equiwalk.errors import ValidationError

from conftest import random_hermitian, random_state


def test_simpson_weights_integrate_cubic_exactly():
    w = oracles.simpson_weights(4, 0.5)
    t = np.linspace(0, 2, 5)
    assert abs(np.sum(w * t ** 3) - 4.0) < 1e-14
    with pytest.raises(ValidationError):
        oracles.simpson_weights(3, 0.1)


@pytest.mark.parametrize("omega", [0.0, 1e-9, 0.37, 5.0, -2.2])
def test_geometric_simpson_matches_sampled_sum(omega):
    T, n = 50.0, 2000
    h = T / n
    t = np.arange(n + 1) * h
    brute = np.sum(oracles.simpson_weights(n, h) * np.exp(1j * omega * (1.5 + t))) / T
    fast = oracles.simpson_exponential_average(omega, T, n, t0=1.5)
    assert abs(brute - fast) < 1e-13


def test_dense_quadrature_fast_equals_brute(rng):
    H = random_hermitian(rng, 8)
    psi = random_state(rng, 8)
    a = rng.uniform(-1, 1, 8)
    fast = oracles.dense_quadrature_average(H, psi, a, 40.0)
    brute = oracles.dense_quadrature_average(H, psi, a, 40.0, brute_force=True)
    assert abs(fast - brute) < 1e-12


def test_quadrature_matches_exact_finite_T(rng):
    H = random_hermitian(rng, 10)
    psi = random_state(rng, 10)
    a = rng.uniform(-1, 1, 10)
    dec = spectral.eigendecompose(H)
    T = 25.0
    exact = spectral.time_averaged_expectation(dec, psi, a, T)
    assert abs(exact - oracles.dense_quadrature_average(H, psi, a, T)) < 1e-6


@pytest.mark.parametrize("dim", [4, 8, 64])
def test_long_time_quadrature_converges_to_limit(rng, dim):
    H = random_hermitian(rng, dim)
    psi = random_state(rng, dim)
    a = rng.uniform(-1, 1, dim)
    dec = spectral.eigendecompose(H)
    T = 1e5
    lim = spectral.infinite_time_average_expectation(dec, psi, a)
    assert abs(lim - oracles.dense_quadrature_average(H, psi, a, T)) <= 2 / (T * dec.min_gap()) + 1e-9
