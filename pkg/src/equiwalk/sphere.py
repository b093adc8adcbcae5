"""Zonal harmonics on S^{d-1} and the time-averaged density of a normalized delta-sequence.

The delta-sequence is R^{(n)} = sum_{k<=n} mu_{n,k,d} Z^{(k)}, normalized as
S^{(n)} = R^{(n)} / sqrt(M_{n,d}). Since the Laplace eigenvalues k(k+d-2) are
distinct, cross-degree terms average out and the infinite-time density is
p^{(n)} = M^{-1} sum_k mu_k^2 |Z^{(k)}|^2.

Factorials are handled in log-gamma space throughout.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .errors import ValidationError


def _check_d(d: int) -> int:
    if int(d) != d or d < 3:
        raise ValidationError("sphere dimension parameter d must be an integer >= 3")
    return int(d)


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-12):
        raise ValidationError("cosangle must lie in [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def sphere_area(d: int) -> float:
    """|S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)."""
    return float(2 * np.exp(0.5 * d * np.log(np.pi) - gammaln(d / 2)))


def harmonic_dimension(k, d: int) -> np.ndarray:
    """N_{k,d} = (2k+d-2)(k+d-3)! / (k! (d-2)!)."""
    d = _check_d(d)
    k = np.asarray(k, dtype=float)
    logv = gammaln(k + d - 2) - gammaln(k + 1) - gammaln(d - 1)
    return np.rint((2 * k + d - 2) * np.exp(logv))


def legendre_table(n: int, t, d: int = 3) -> np.ndarray:
    """Rows P_{k,d}(t) for k = 0..n, normalized so P_{k,d}(1) = 1.

    Gegenbauer recurrence for C_k^{(d-2)/2} divided through by C_k(1) = binom(k+d-3, k):
    (k+d-2) P_{k+1} = (2k+d-2) t P_k - k P_{k-1}. For d = 3 this is Bonnet's recurrence.
    """
    d = _check_d(d)
    t = _check_t(t)
    out = np.empty((n + 1,) + t.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = t
    for k in range(1, n):
        out[k + 1] = ((2 * k + d - 2) * t * out[k] - k * out[k - 1]) / (k + d - 2)
    return out


def legendre(n: int, t) -> np.ndarray:
    if n < 0:
        raise ValidationError("degree must be non-negative")
    return legendre_table(n, t, 3)[n]


def legendre_general(n: int, d: int, t) -> np.ndarray:
    if n < 0:
        raise ValidationError("degree must be non-negative")
    return legendre_table(n, t, d)[n]


def zonal_value(k: int, d: int, cosangle) -> np.ndarray:
    return harmonic_dimension(k, d) / sphere_area(d) * legendre_general(k, d, cosangle)


def funk_hecke_rule(d: int, nodes: int):
    """Nodes t_j and weights w_j with sum_j w_j f(t_j) = (|S^{d-2}|/|S^{d-1}|) int f(t)(1-t^2)^{(d-3)/2} dt.

    So for f depending on xi.eta only, the sphere average (1/|S^{d-1}|) int f dS = sum_j w_j f(t_j).
    """
    d = _check_d(d)
    alpha = (d - 3) / 2
    if alpha == 0:
        t, w = np.polynomial.legendre.leggauss(nodes)
    else:
        t, w = roots_jacobi(nodes, alpha, alpha)
    return t, w * sphere_area(d - 1) / sphere_area(d)


def sphere_average(f, d: int, nodes: int = 64) -> float:
    t, w = funk_hecke_rule(d, nodes)
    return float(np.sum(w * f(t)))


class ZonalCoefficients(NamedTuple):
    n: int
    d: int
    mu: np.ndarray
    N: np.ndarray
    M: float
    E: float
    area: float


def log_mu(n: int, k, d: int) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return (gammaln(n + 1) + gammaln(n + d - 1) - gammaln(n - k + 1) - gammaln(n + k + d - 1))


def peak_value(n: int, d: int) -> float:
    """E_{n,d} = (n+d-2)! / ((4 pi)^{(d-1)/2} Gamma(n + (d-1)/2))."""
    return float(np.exp(gammaln(n + d - 1) - 0.5 * (d - 1) * np.log(4 * np.pi) - gammaln(n + (d - 1) / 2)))


def zonal_coefficients(n: int, d: int = 3) -> ZonalCoefficients:
    d = _check_d(d)
    if n < 0:
        raise ValidationError("n must be non-negative")
    k = np.arange(n + 1)
    mu = np.exp(log_mu(n, k, d))
    N = harmonic_dimension(k, d)
    area = sphere_area(d)
    M = float(np.sum(mu ** 2 * N) / area)
    return ZonalCoefficients(n, d, mu, N, M, peak_value(n, d), area)


def density_p(n: int, d: int, cosangle) -> np.ndarray:
    """p^{(n)}(eta) as a function of cosangle = xi.eta."""
    zc = zonal_coefficients(n, d)
    P = legendre_table(n, cosangle, d)
    Z = (zc.N / zc.area)[:, None] * P.reshape(n + 1, -1)
    val = np.sum((zc.mu ** 2)[:, None] * Z ** 2, axis=0) / zc.M
    return val.reshape(np.shape(cosangle))


def density_mass(n: int, d: int = 3) -> float:
    """Integral of p^{(n)} over the sphere by Funk-Hecke quadrature."""
    t, w = funk_hecke_rule(d, 2 * n + 16)
    return float(sphere_area(d) * np.sum(w * density_p(n, d, t)))


def ztilde_quadratic_expectation(k: int) -> float:
    """<Z~^{(k)}, t^2 Z~^{(k)}> for the L^2-normalized zonal harmonic on S^2.

    Equals (1/(2k+1)) (k^2/(2k-1) + (k+1)^2/(2k+3)); the first sub-term is taken as 0 at k = 0.
    """
    if k < 0:
        raise ValidationError("k must be non-negative")
    first = 0.0 if k == 0 else k * k / (2 * k - 1)
    return (first + (k + 1) ** 2 / (2 * k + 3)) / (2 * k + 1)


def ztilde_quadratic_quadrature(k: int) -> float:
    """((2k+1)/2) int t^2 P_k(t)^2 dt by Gauss-Legendre with 4k+16 nodes."""
    t, w = np.polynomial.legendre.leggauss(4 * k + 16)
    return float((2 * k + 1) / 2 * np.sum(w * t ** 2 * legendre(k, t) ** 2))


def uniform_average_quadratic(d: int = 3) -> float:
    """Sphere average of (xi.eta)^2, the n = 0 case of Funk-Hecke."""
    return sphere_average(lambda t: t ** 2, d, 16)


def s_state_quadratic_average(n: int) -> float:
    """Infinite-time average of <S^{(n)}, t^2 S^{(n)}> on S^2."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    zc = zonal_coefficients(n, 3)
    k = np.arange(n + 1, dtype=float)
    first = np.where(k == 0, 0.0, k * k / np.where(k == 0, 1.0, 2 * k - 1))
    inner = (first + (k + 1) ** 2 / (2 * k + 3)) / (4 * np.pi)
    return float(np.sum(zc.mu ** 2 * inner) / zc.M)


def s_state_lower_bound(n: int) -> float:
    return 0.5 - 1.0 / (24 * np.pi * zonal_coefficients(n, 3).M)


class DixonCheck(NamedTuple):
    direct: float
    closed_form: float
    asymptotic: float

    @property
    def relative_error(self) -> float:
        return abs(self.direct - self.closed_form) / self.closed_form

    @property
    def ratio(self) -> float:
        return self.direct / self.asymptotic


def dixon_sum_check(n: int) -> DixonCheck:
    """sum_k mu_{n,k,3}^2 against its hypergeometric closed form and (1/2) sqrt(pi n / 2)."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    direct = float(np.sum(np.exp(2 * log_mu(n, np.arange(n + 1), 3))))
    logc = (gammaln(1.5) + gammaln(1.5 + 2 * n) + 2 * gammaln(2 + n)
            - gammaln(2.0) - gammaln(2 + 2 * n) - 2 * gammaln(1.5 + n))
    return DixonCheck(direct, float(np.exp(logc)), 0.5 * np.sqrt(np.pi * n / 2))


def delta_sequence_pairing(n: int, f, d: int = 3) -> float:
    """<R^{(n)}, f(xi . )> by Funk-Hecke: sum_k mu_k N_k int P_k f dsigma."""
    zc = zonal_coefficients(n, d)
    t, w = funk_hecke_rule(d, 2 * n + 32)
    P = legendre_table(n, t, d)
    return float(np.sum(zc.mu * zc.N * (P @ (w * f(t)))))


def delta_sequence_check(n: int, f, d: int = 3) -> tuple:
    """(pairing <R^{(n)}, f>, f(1), R^{(n)}(xi), E_{n,d})."""
    zc = zonal_coefficients(n, d)
    peak = float(np.sum(zc.mu * zc.N) / zc.area)
    return delta_sequence_pairing(n, f, d), float(f(np.array(1.0))), peak, zc.E


def sphere_table(n_list, eta: float = 0.3) -> list:
    """Rows (n, p_at_xi, p_at_eta, quadratic_average, lower_bound, dixon_ratio)."""
    rows = []
    for n in n_list:
        dx = dixon_sum_check(n)
        rows.append((int(n), float(density_p(n, 3, 1.0)), float(density_p(n, 3, eta)),
                     s_state_quadratic_average(n), s_state_lower_bound(n),
                     dx.ratio if n > 0 else float("nan")))
    return rows
