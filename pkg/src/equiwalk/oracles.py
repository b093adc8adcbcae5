"""Brute-force reference computations used to cross-check the closed forms.

Nothing in the production paths calls these; they exist so tests and the
acceptance suite can compare against an independent numerical route.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError


def simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    if n_intervals < 2 or n_intervals % 2:
        raise ValidationError("Simpson rule needs an even number of intervals >= 2")
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def simpson_step_count(T: float, omega_max: float, max_phase_step: float = 0.1) -> int:
    """Even number of intervals on [0, T] with omega_max * step <= max_phase_step."""
    n = int(np.ceil(T * max(omega_max, 1e-300) / max_phase_step))
    n = max(n, 2)
    return n + (n % 2)


def simpson_time_average(f, T: float, omega_max: float, t0: float = 0.0,
                         max_phase_step: float = 0.1, chunk: int = 200_000) -> complex:
    """(1/T) * integral_{t0}^{t0+T} f(t) dt by the composite Simpson rule.

    ``f`` must accept a 1-D array of times. The grid is processed in chunks so
    memory stays bounded for long windows.
    """
    n = simpson_step_count(T, omega_max, max_phase_step)
    h = T / n
    total = 0j
    for start in range(0, n + 1, chunk):
        idx = np.arange(start, min(start + chunk, n + 1))
        w = np.where((idx == 0) | (idx == n), 1.0, np.where(idx % 2 == 1, 4.0, 2.0))
        total += np.sum(w * f(t0 + idx * h))
    return complex(total * h / 3.0 / T)


def eigenbasis_expectation_series(H, psi0, a, phi=None):
    """Vectorized t -> <e^{-itH} phi, a e^{-itH} psi0> built from a raw eigh.

    Uses the raw eigenvectors without any level grouping, so it shares no code
    with the clustered closed forms.
    """
    H = np.asarray(H, dtype=complex)
    w, V = np.linalg.eigh(H)
    a = np.asarray(a)
    A = V.conj().T @ (np.diag(a) if a.ndim == 1 else a) @ V
    cpsi = V.conj().T @ np.asarray(psi0, dtype=complex)
    cphi = cpsi if phi is None else V.conj().T @ np.asarray(phi, dtype=complex)
    spread = float(w.max() - w.min())

    def f(t):
        ph = np.exp(-1j * np.outer(t, w))
        x = ph * cpsi
        y = ph * cphi
        return np.einsum("tk,kj,tj->t", y.conj(), A, x)

    return f, spread


def simpson_exponential_average(omega, T: float, n_intervals: int, t0: float = 0.0) -> np.ndarray:
    """Composite Simpson rule for (1/T) * integral_{t0}^{t0+T} exp(i omega t) dt.

    The weighted sum over the 2M+1 grid points is a pair of geometric series,
    summed here in closed form with expm1 so small omega keeps full precision.
    The result equals the brute-force Simpson sum up to rounding.
    """
    omega = np.asarray(omega, dtype=float)
    M = n_intervals // 2
    h = T / n_intervals
    x = 1j * omega * h
    z = np.exp(x)
    den = -np.expm1(2 * x)
    flat = np.abs(den) < 1e-14
    den = np.where(flat, 1.0, den)
    odd = np.where(flat, M * z, z * (-np.expm1(2 * M * x)) / den)
    even = np.where(flat, (M - 1) * z * z, z * z * (-np.expm1(2 * (M - 1) * x)) / den)
    s = 1.0 + np.exp(2 * M * x) + 4.0 * odd + 2.0 * even
    return np.exp(1j * omega * t0) * s * (h / 3.0) / T


def dense_quadrature_average(H, psi0, a, T: float, phi=None, max_phase_step: float = 0.1,
                             brute_force: bool = False) -> complex:
    """Simpson average of the expectation series on [0, T] from a raw eigh.

    With ``brute_force`` the series is sampled on the grid; otherwise each
    eigenfrequency pair is summed through ``simpson_exponential_average``.
    """
    f, spread = eigenbasis_expectation_series(H, psi0, a, phi)
    if brute_force:
        return simpson_time_average(f, T, spread, max_phase_step=max_phase_step, chunk=20_000)
    H = np.asarray(H, dtype=complex)
    w, V = np.linalg.eigh(H)
    a = np.asarray(a)
    A = V.conj().T @ (np.diag(a) if a.ndim == 1 else a) @ V
    cpsi = V.conj().T @ np.asarray(psi0, dtype=complex)
    cphi = cpsi if phi is None else V.conj().T @ np.asarray(phi, dtype=complex)
    C = cphi.conj()[:, None] * A * cpsi[None, :]
    n = simpson_step_count(T, spread, max_phase_step)
    K = simpson_exponential_average(w[:, None] - w[None, :], T, n)
    return complex(np.sum(C * K))
