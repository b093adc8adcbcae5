import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_gegenbauer, eval_legendre, gammaln

from equiwalk import sphere
from equiwalk.errors import ValidationError


def test_legendre_against_scipy():
    t = np.linspace(-1, 1, 41)
    for n in (0, 1, 5, 30, 200):
        np.testing.assert_allclose(sphere.legendre(n, t), eval_legendre(n, t), atol=1e-12)


@pytest.mark.parametrize("d", [4, 5, 7])
def test_gegenbauer_normalization_against_scipy(d):
    t = np.linspace(-1, 1, 17)
    lam = (d - 2) / 2
    for k in (0, 1, 4, 12):
        ref = eval_gegenbauer(k, lam, t) / eval_gegenbauer(k, lam, 1.0)
        np.testing.assert_allclose(sphere.legendre_general(k, d, t), ref, atol=1e-12)


def test_harmonic_dimension_small_cases():
    assert list(sphere.harmonic_dimension(np.arange(4), 3)) == [1, 3, 5, 7]
    assert list(sphere.harmonic_dimension(np.arange(4), 4)) == [1, 4, 9, 16]


def test_sphere_area():
    assert abs(sphere.sphere_area(3) - 4 * np.pi) < 1e-12
    assert abs(sphere.sphere_area(4) - 2 * np.pi ** 2) < 1e-12


def test_input_validation():
    with pytest.raises(ValidationError):
        sphere.legendre_general(2, 2, 0.0)
    with pytest.raises(ValidationError):
        sphere.legendre(2, 1.5)
    with pytest.raises(ValidationError):
        sphere.zonal_coefficients(-1)


@pytest.mark.parametrize("d", [3, 4, 6])
def test_zonal_addition_theorem_at_pole(d):
    # sum over an orthonormal basis of |Y|^2 is N/|S|, which is Z^{(k)}(xi, xi)
    for k in (0, 3, 9):
        assert abs(sphere.zonal_value(k, d, 1.0) - sphere.harmonic_dimension(k, d) / sphere.sphere_area(d)) < 1e-10


@pytest.mark.parametrize("d", [3, 5])
def test_funk_hecke_rule_integrates_polynomials(d):
    # average of t^2 over S^{d-1} is 1/d
    assert abs(sphere.sphere_average(lambda t: t ** 2, d) - 1 / d) < 1e-13
    assert abs(sphere.sphere_average(lambda t: np.ones_like(t), d) - 1) < 1e-13


@pytest.mark.parametrize("d", [3, 4, 5])
def test_density_mass_is_one(d):
    for n in (0, 5, 40):
        assert abs(sphere.density_mass(n, d) - 1) < 1e-8


@pytest.mark.parametrize("d", [3, 5])
def test_peak_identity(d):
    # R^{(n)}(xi) equals E_{n,d}
    for n in (3, 20, 150):
        _, _, peak, E = sphere.delta_sequence_check(n, lambda t: t, d)
        assert abs(peak / E - 1) < 1e-10


def test_delta_sequence_pairing():
    pair, f1, _, _ = sphere.delta_sequence_check(100, lambda t: np.ones_like(t))
    assert abs(pair - 1) < 1e-10
    p = [sphere.delta_sequence_check(n, lambda t: t)[0] for n in (10, 40, 160)]
    assert p[0] < p[1] < p[2] < 1


def test_mu_log_gamma_against_direct_factorials():
    from math import factorial
    n, d = 12, 3
    for k in range(n + 1):
        direct = factorial(n) * factorial(n + d - 2) / (factorial(n - k) * factorial(n + k + d - 2))
        assert abs(np.exp(sphere.log_mu(n, k, d)) - direct) < 1e-12 * direct


def test_no_overflow_at_large_n():
    zc = sphere.zonal_coefficients(2000)
    assert np.all(np.isfinite(zc.mu)) and np.isfinite(zc.M) and np.isfinite(zc.E)


@given(st.integers(0, 150))
def test_moment_closed_form_vs_quadrature(k):
    assert abs(sphere.ztilde_quadratic_expectation(k) - sphere.ztilde_quadratic_quadrature(k)) < 1e-10


def test_moment_k0_and_limit():
    assert abs(sphere.ztilde_quadratic_expectation(0) - 1 / 3) < 1e-15
    assert abs(sphere.ztilde_quadratic_expectation(50) - 0.5) < 2e-3


def test_s_state_average_against_quadrature():
    # independent route: integrate t^2 p(t) over the sphere
    for n in (1, 7, 30):
        t, w = sphere.funk_hecke_rule(3, 2 * n + 20)
        ref = sphere.sphere_area(3) * np.sum(w * t ** 2 * sphere.density_p(n, 3, t))
        assert abs(sphere.s_state_quadratic_average(n) - ref) < 1e-10


@given(st.integers(1, 400))
def test_s_state_lower_bound(n):
    assert sphere.s_state_quadratic_average(n) >= sphere.s_state_lower_bound(n)


def test_dixon_sum():
    for n in (0, 1, 10, 300):
        assert sphere.dixon_sum_check(n).relative_error < 1e-10
    assert abs(sphere.dixon_sum_check(500).ratio - 1) < 0.05


def test_dixon_sum_exact_rationals():
    from fractions import Fraction
    from math import factorial
    for n in (1, 2, 6):
        mu = [Fraction(factorial(n) * factorial(n + 1), factorial(n - k) * factorial(n + k + 1)) for k in range(n + 1)]
        exact = float(sum(m * m for m in mu))
        dx = sphere.dixon_sum_check(n)
        assert abs(dx.direct - exact) < 1e-14 * exact
        assert abs(dx.closed_form - exact) < 1e-12 * exact


def test_table_rows():
    rows = sphere.sphere_table([10, 20])
    assert len(rows) == 2 and rows[1][1] > rows[0][1]
    assert np.isnan(sphere.sphere_table([0])[0][5])
