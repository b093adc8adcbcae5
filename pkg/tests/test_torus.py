import numpy as np
import pytest
from hypothesis import given, strategies as st

from equiwalk import oracles, torus
from equiwalk.errors import ValidationError


def _wave(state, t, x):
    """e^{itD} psi at points x, built directly from the modes."""
    x = np.atleast_2d(x)
    ph = np.exp(2j * np.pi * (x / np.asarray(state.b)) @ state.modes.T)
    return ph @ (state.coeffs * np.exp(-1j * t * state.lam))


def _position_expectation(state, a, t, G=64):
    xs = (np.arange(G) + 0.5) / G
    pts = np.array(np.meshgrid(*[xs] * state.d, indexing="ij")).reshape(state.d, -1).T
    psi = _wave(state, t, pts)
    return np.mean(a.evaluate(pts) * np.abs(psi) ** 2)


def test_mode_enumeration():
    ms = torus.enumerate_modes(4 * np.pi ** 2 * 4 + 1)
    assert sorted(ms.modes.ravel()) == [-2, -1, 0, 1, 2]
    ms2 = torus.enumerate_modes(4 * np.pi ** 2 * 25, d=2)
    assert ms2.count == sum(1 for i in range(-5, 6) for j in range(-5, 6) if i * i + j * j <= 25)


def test_weyl_law():
    ms = torus.enumerate_modes(4e5, d=2)
    assert abs(ms.count / (ms.weyl_constant() * 4e5) - 1) < 0.01


def test_resonant_pair_count_unit_and_stretched():
    ms = torus.enumerate_modes(4 * np.pi ** 2 * 100, d=1)
    # on the circle l -> l + m keeps |l| only for l = -m/2
    assert torus.resonant_pair_count(ms, [2]) == 1
    assert torus.resonant_pair_count(ms, [3]) == 0
    ms2 = torus.enumerate_modes(4 * np.pi ** 2 * 16, d=2, b=(1.0, np.sqrt(2)))
    assert torus.resonant_pair_count(ms2, [2, 0]) >= 1
    with pytest.raises(ValidationError):
        torus.resonant_pair_count(ms, [0])


def test_sharp_state_normalized_and_peaked():
    st_ = torus.sharp_state([0.3], 4 * np.pi ** 2 * 20)
    assert abs(st_.norm2 - 1) < 1e-12
    vals = np.abs(st_.evaluate(np.array([[0.3], [0.55]])))
    assert vals[0] > 5 * vals[1]


def test_instantaneous_matches_position_space():
    st_ = torus.sharp_state([0.2, 0.7], 4 * np.pi ** 2 * 6)
    a = torus.smooth_observable(2, K=3, seed=4)
    for t in (0.0, 0.013, 0.4):
        ref = _position_expectation(st_, a, t)
        assert abs(torus.instantaneous_expectation(st_, a, t) - ref) < 1e-12


def test_time_average_matches_simpson_oracle():
    st_ = torus.sharp_state([0.3], 4 * np.pi ** 2 * 9)
    a = torus.smooth_observable(1, K=4, seed=2)
    T = 0.05
    f = lambda ts: np.array([_position_expectation(st_, a, t) for t in ts])
    ref = oracles.simpson_time_average(f, T, float(st_.lam.max()), max_phase_step=0.02)
    assert abs(torus.averaged_expectation(st_, a, T).value - ref) < 1e-6


def test_density_profile_matches_simpson_oracle():
    st_ = torus.sharp_state([0.4], 4 * np.pi ** 2 * 16)
    T = 0.1
    prof = torus.density_profile(st_, T, grid_resolution=32)
    f = lambda ts: np.abs(np.array([_wave(st_, t, prof.grid) for t in ts])) ** 2
    n = oracles.simpson_step_count(T, float(st_.lam.max()), 0.02)
    h = T / n
    w = oracles.simpson_weights(n, h)
    ref = np.tensordot(w, f(np.arange(n + 1) * h), axes=1) / T
    assert np.max(np.abs(prof.values - ref)) < 1e-6
    assert abs(prof.mass - 1) < 1e-12


def test_density_weak_convergence():
    # pairing the time-averaged density with a smooth test function approaches its integral
    a = torus.smooth_observable(1, K=6, seed=9)
    errs = []
    for E in (1e2, 1e3, 1e4):
        st_ = torus.sharp_state([0.3], E)
        prof = torus.density_profile(st_, 1.0, grid_resolution=512)
        pairing = np.mean(a.evaluate(prof.grid) * prof.values)
        assert abs(pairing - torus.averaged_expectation(st_, a, 1.0).value) < 1e-10
        errs.append(abs(pairing - a.mean))
    assert errs[0] > errs[1] > errs[2]


def test_term_breakdown_limit_and_degenerate_pair():
    rep = torus.degenerate_pair_counterexample()
    assert rep.equal_energy and abs(rep.time_average - 1) < 1e-14 and rep.product == 0
    rep2 = torus.degenerate_pair_counterexample((2, 0), (0, 1))
    assert not rep2.equal_energy and rep2.time_average == 0


def test_limit_kills_oscillatory_term():
    st_ = torus.sharp_state([0.1], 4 * np.pi ** 2 * 30)
    a = torus.smooth_observable(1, K=5, seed=1)
    lim = torus.limit_matrix_element(st_, st_, a)
    assert lim.term3 == 0
    big_T = torus.averaged_expectation(st_, a, 1e9)
    assert abs(big_T.value - lim.value) < 1e-6


def test_half_integer_revival_identity():
    for K in (2, 7):
        E = torus.half_integer_energy(K)
        st_ = torus.sharp_state([0.25], E)
        e1 = torus.mode_observable([1])
        for n in range(6):
            v = torus.instantaneous_expectation(st_, e1, n / (4 * np.pi))
            assert abs(v - torus.revival_constant(E) * (-1) ** n * np.exp(0.5j * np.pi)) < 1e-12


@given(st.integers(-40, 40), st.floats(0.0, 0.95), st.floats(0.01, 0.5))
def test_box_coefficients_against_numeric_integral(r, y, eps):
    x = y + (np.arange(4000) + 0.5) / 4000 * eps
    ref = np.mean(np.exp(-2j * np.pi * r * x)) * eps / np.sqrt(eps)
    assert abs(torus.box_coefficients(r, y, eps) - ref) < 1e-6


@given(st.floats(0.02, 0.6), st.floats(0.0, 1.0))
def test_box_state_parseval_loss(eps, y):
    st_ = torus.box_state([y], eps, loss=1e-3)
    assert st_.truncation_loss <= 1e-3 + 1e-12
    assert abs(st_.norm2 - (1 - st_.truncation_loss)) < 1e-9


def test_box_state_shape_2d():
    st_ = torus.box_state([0.1, 0.5], [0.3, 0.2], loss=1e-2)
    assert st_.d == 2 and st_.truncation_loss <= 1e-2


def test_cutoff_state_validation():
    E = 4 * np.pi ** 2 * 10
    chi = lambda lam: np.where(lam <= E, 1.0, 0.0)
    st_ = torus.cutoff_state([0.2], E, chi, 1.0, 1.0)
    sh = torus.sharp_state([0.2], E)
    np.testing.assert_allclose(st_.coeffs, sh.coeffs, atol=1e-14)
    with pytest.raises(ValidationError):
        torus.cutoff_state([0.2], E, lambda lam: np.ones_like(lam), 1.0, 1.0)


def test_discrete_average_flags_resonance():
    vals, flagged = torus.discrete_kernel(np.array([0.0, 2 * np.pi, 1.0]), 10)
    assert flagged == 2 and vals[0] == 1 and vals[1] == 1


def test_dilated_bump_mean_and_shape():
    a = torus.dilated_bump_observable(1, 4.0, x0=[0.5])
    assert abs(a.mean - 0.4 / 4) < 1e-12
    # the transform decays like |xi|^-3, so truncating at K0 * scale leaves ~1e-5 pointwise
    assert abs(a.evaluate(np.array([[0.5]]))[0] - 1) < 1e-4
    assert abs(a.evaluate(np.array([[0.0]]))[0]) < 1e-4


def test_energy_sweep_decreases():
    a = torus.smooth_observable(1, K=8, seed=3)
    rows = torus.energy_sweep([0.3], [1e2, 1e3, 1e4], a)
    errs = [r.abs_error for r in rows]
    assert errs[0] > errs[1] > errs[2]
