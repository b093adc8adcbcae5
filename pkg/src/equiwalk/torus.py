"""Free Schrodinger evolution on the flat torus prod_i [0, b_i).

Everything is done in the momentum representation e_l(x) = prod_i e^{2 pi i l_i x_i / b_i}
with -Delta e_l = lambda_l e_l, lambda_l = 4 pi^2 sum_i l_i^2 / b_i^2. For states
phi, psi with coefficients psi_l = <e_l, psi> and an observable a = sum_m a_m e_m,

    <e^{itD} phi, a e^{itD} psi> = sum_m a_m sum_l e^{it(lambda_{l+m} - lambda_l)} psi_l conj(phi_{l+m}),

so every time average only needs a scalar kernel applied to the frequency
lambda_{l+m} - lambda_l. The sum is split as
term1 (m = 0), term2 (m != 0, zero frequency) and term3 (the rest).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ValidationError
from .spectral import kappa

MAX_MODES = 10_000_000
FOUR_PI2 = 4 * np.pi ** 2


def _lengths(d: int, b) -> tuple:
    b = (1.0,) * d if b is None else tuple(float(x) for x in np.atleast_1d(b))
    if len(b) != d or any(x <= 0 for x in b):
        raise ValidationError(f"need {d} positive torus lengths, got {b}")
    return b


def _eig(modes: np.ndarray, b: tuple) -> np.ndarray:
    return FOUR_PI2 * np.sum((modes / np.asarray(b)) ** 2, axis=1)


def _is_unit(b: tuple) -> bool:
    return all(x == 1.0 for x in b)


class _ModeIndex:
    """Dense lookup table from integer vectors to row indices."""

    def __init__(self, modes: np.ndarray):
        self.lo = modes.min(axis=0) if len(modes) else np.zeros(modes.shape[1], dtype=int)
        hi = modes.max(axis=0) if len(modes) else self.lo
        self.shape = tuple(int(x) for x in hi - self.lo + 1)
        self.table = np.full(self.shape, -1, dtype=np.int64)
        if len(modes):
            self.table[tuple((modes - self.lo).T)] = np.arange(len(modes))

    def find(self, pts: np.ndarray) -> np.ndarray:
        rel = pts - self.lo
        ok = np.all((rel >= 0) & (rel < np.array(self.shape)), axis=1)
        out = np.full(len(pts), -1, dtype=np.int64)
        out[ok] = self.table[tuple(rel[ok].T)]
        return out


@dataclass(frozen=True)
class DualModeSet:
    E: float
    d: int
    b: tuple
    modes: np.ndarray
    lam: np.ndarray

    @property
    def count(self) -> int:
        return len(self.modes)

    def weyl_constant(self) -> float:
        """c with N_E ~ c E^{d/2}: ball volume times prod b_i / (2 pi)^d."""
        from scipy.special import gamma
        vol = np.pi ** (self.d / 2) / gamma(self.d / 2 + 1)
        return float(vol * np.prod(self.b) / (2 * np.pi) ** self.d)


def enumerate_modes(E: float, d: int = 1, b=None) -> DualModeSet:
    if E < 0:
        raise ValidationError("energy cap E must be non-negative")
    b = _lengths(d, b)
    bounds = [int(np.floor(bi * np.sqrt(E) / (2 * np.pi))) for bi in b]
    if np.prod([2 * x + 1 for x in bounds], dtype=float) > 4 * MAX_MODES:
        raise ValidationError(f"E = {E} needs more than {MAX_MODES} modes")
    axes = [np.arange(-x, x + 1) for x in bounds]
    modes = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    lam = _eig(modes, b)
    keep = lam <= E * (1 + 1e-12)
    modes, lam = modes[keep], lam[keep]
    if len(modes) > MAX_MODES:
        raise ValidationError(f"N_E = {len(modes)} exceeds the cap {MAX_MODES}")
    return DualModeSet(float(E), d, b, modes, lam)


def resonant_pair_count(modeset: DualModeSet, m) -> int:
    m = np.asarray(m, dtype=int).reshape(-1)
    if m.shape != (modeset.d,):
        raise ValidationError("m has wrong dimension")
    if not np.any(m):
        raise ValidationError("resonant_pair_count needs m != 0")
    idx = _ModeIndex(modeset.modes).find(modeset.modes + m)
    ok = idx >= 0
    ell = modeset.modes[ok]
    if _is_unit(modeset.b):
        return int(np.sum(2 * ell @ m == -int(m @ m)))
    diff = modeset.lam[idx[ok]] - modeset.lam[ok]
    return int(np.sum(np.abs(diff) <= 1e-9 * max(modeset.E, 1.0)))


# ------------------------------------------------------------------- states

@dataclass(frozen=True)
class TruncatedState:
    """psi = sum_l coeffs[l] e_l over the listed modes."""

    modes: np.ndarray
    coeffs: np.ndarray
    b: tuple
    kind: str
    center: tuple = ()
    truncation_loss: float = 0.0
    E: float = np.inf
    _index: object = field(default=None, repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.modes.shape[1]

    @property
    def lam(self) -> np.ndarray:
        return _eig(self.modes, self.b)

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def index(self) -> _ModeIndex:
        if self._index is None:
            object.__setattr__(self, "_index", _ModeIndex(self.modes))
        return self._index

    def evaluate(self, x) -> np.ndarray:
        """psi(x) at points x of shape (n, d)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ph = np.exp(2j * np.pi * (x / np.asarray(self.b)) @ self.modes.T)
        return ph @ self.coeffs


def _fourier_at(modes, y, b) -> np.ndarray:
    """e_l(y) for every mode."""
    y = np.asarray(y, dtype=float).reshape(-1)
    return np.exp(2j * np.pi * modes @ (y / np.asarray(b)))


def sharp_state(y, E: float, b=None) -> TruncatedState:
    """delta_y^E with coefficients conj(e_l(y)) / sqrt(N_E)."""
    y = tuple(float(v) for v in np.atleast_1d(y))
    ms = enumerate_modes(E, len(y), b)
    c = np.conj(_fourier_at(ms.modes, y, ms.b)) / np.sqrt(ms.count)
    return TruncatedState(ms.modes, c, ms.b, "sharp", y, 0.0, float(E))


def cutoff_state(y, E: float, chi: Callable, c0: float, c1: float, b=None) -> TruncatedState:
    """chi_y^E with coefficients chi(lambda_l) conj(e_l(y)), normalized.

    chi must vanish above E and satisfy c0 <= chi <= c1 on [0, E - 1].
    """
    if not (0 < c0 <= c1):
        raise ValidationError("need 0 < c0 <= c1")
    y = tuple(float(v) for v in np.atleast_1d(y))
    ms = enumerate_modes(E, len(y), b)
    w = np.asarray(chi(ms.lam), dtype=float)
    low = ms.lam <= E - 1
    if np.any(w[low] < c0 - 1e-12) or np.any(w[low] > c1 + 1e-12):
        raise ValidationError("cutoff violates c0 <= chi <= c1 on [0, E-1]")
    probe = np.linspace(E, 2 * E + 1, 64)[1:]
    if np.any(np.asarray(chi(probe), dtype=float) != 0):
        raise ValidationError("cutoff must vanish above E")
    c = w * np.conj(_fourier_at(ms.modes, y, ms.b))
    return TruncatedState(ms.modes, c / np.linalg.norm(c), ms.b, "cutoff", y, 0.0, float(E))


def box_coefficients(r, y: float, eps: float) -> np.ndarray:
    """<e_r, phi_eps> for phi_eps = eps^{-1/2} 1_[y, y+eps] on the unit circle."""
    r = np.asarray(r, dtype=float)
    rs = np.where(r == 0, 1.0, r)
    val = (np.exp(-2j * np.pi * rs * (y + eps)) - np.exp(-2j * np.pi * rs * y)) / (-2j * np.pi * rs)
    return np.where(r == 0, np.sqrt(eps), val / np.sqrt(eps))


def _axis_cutoff(coef_abs2: Callable, loss: float, r_max: int) -> int:
    r = np.arange(1, r_max + 1)
    mass = coef_abs2(np.array([0.0]))[0] + np.cumsum(coef_abs2(r) + coef_abs2(-r))
    hit = np.flatnonzero(mass >= 1 - loss)
    if len(hit) == 0:
        raise ValidationError(f"Parseval loss target {loss} not reached within |r| <= {r_max}")
    return int(r[hit[0]])


def general_tensor_state(axis_coeffs, R, kind: str = "tensor", center=(), b=None) -> TruncatedState:
    """Tensor product state from per-axis coefficient functions r -> <e_r, phi_i>.

    ``R`` gives the truncation |r_i| <= R_i per axis. Each axis function must be
    normalized in l^2(Z); the reported loss is 1 - prod_i (captured mass_i).
    """
    d = len(axis_coeffs)
    R = [int(x) for x in np.broadcast_to(np.atleast_1d(R), (d,))]
    axes = [np.arange(-Ri, Ri + 1) for Ri in R]
    per_axis = [np.asarray(f(ax), dtype=complex) for f, ax in zip(axis_coeffs, axes)]
    modes = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    c = per_axis[0]
    for p in per_axis[1:]:
        c = np.multiply.outer(c, p)
    captured = np.prod([np.sum(np.abs(p) ** 2) for p in per_axis])
    return TruncatedState(modes, c.reshape(-1), _lengths(d, b), kind, tuple(center), float(1 - captured))


def box_state(y, eps, loss: float = 1e-3, R=None) -> TruncatedState:
    """phi_eps = prod_i eps_i^{-1/2} 1_[y_i, y_i + eps_i] on the unit torus, truncated in frequency."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eps = np.broadcast_to(np.atleast_1d(np.asarray(eps, dtype=float)), y.shape)
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise ValidationError("box widths must satisfy 0 < eps < 1")
    d = len(y)
    funcs = [lambda r, yi=yi, ei=ei: box_coefficients(r, yi, ei) for yi, ei in zip(y, eps)]
    if R is None:
        per_axis_loss = 1 - (1 - loss) ** (1.0 / d)
        R = []
        for f, ei in zip(funcs, eps):
            r_max = int(4 / (ei * per_axis_loss * np.pi ** 2)) + 16
            R.append(_axis_cutoff(lambda r, f=f: np.abs(f(r)) ** 2, per_axis_loss, r_max))
    return general_tensor_state(funcs, R, "box", tuple(y))


def mode_state(ell, b=None) -> TruncatedState:
    ell = np.atleast_2d(np.asarray(ell, dtype=int))
    return TruncatedState(ell, np.ones(1, dtype=complex), _lengths(ell.shape[1], b), "mode")


# -------------------------------------------------------------- observables

@dataclass(frozen=True)
class TorusObservable:
    """a = sum_m values[m] e_m over a finite frequency support."""

    modes: np.ndarray
    values: np.ndarray

    @classmethod
    def from_dict(cls, coeffs: dict) -> "TorusObservable":
        keys = [tuple(np.atleast_1d(k).astype(int)) for k in coeffs]
        if not keys:
            raise ValidationError("observable needs at least one coefficient")
        return cls(np.array(keys, dtype=int), np.array([complex(v) for v in coeffs.values()]))

    @property
    def d(self) -> int:
        return self.modes.shape[1]

    @property
    def mean(self) -> complex:
        """integral of a over the torus (normalized volume) = a_0."""
        hit = ~np.any(self.modes, axis=1)
        return complex(np.sum(self.values[hit]))

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.values)))

    def evaluate(self, x, b=None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        b = np.asarray(_lengths(self.d, b))
        return np.exp(2j * np.pi * (x / b) @ self.modes.T) @ self.values


def constant_observable(d: int, c: complex = 1.0) -> TorusObservable:
    return TorusObservable(np.zeros((1, d), dtype=int), np.array([complex(c)]))


def mode_observable(m) -> TorusObservable:
    m = np.atleast_1d(np.asarray(m, dtype=int))
    return TorusObservable(m.reshape(1, -1), np.ones(1, dtype=complex))


def smooth_observable(d: int, K: int = 8, seed: int = 0, decay: float = 3.0, mean: float = 1.0) -> TorusObservable:
    """Real-valued random trigonometric polynomial, |a_m| ~ (1+|m|)^{-decay}, |m|_inf <= K."""
    rng = np.random.default_rng(seed)
    grid = np.array(np.meshgrid(*[np.arange(-K, K + 1)] * d, indexing="ij")).reshape(d, -1).T
    vals = {}
    for m in grid:
        k = tuple(int(x) for x in m)
        neg = tuple(-x for x in k)
        if neg in vals:
            vals[k] = np.conj(vals[neg])
        elif not any(k):
            vals[k] = complex(mean)
        else:
            vals[k] = (1 + np.linalg.norm(k)) ** (-decay) * (rng.normal() + 1j * rng.normal())
    return TorusObservable.from_dict(vals)


def raised_cosine_ft(xi, radius: float) -> np.ndarray:
    """Fourier transform on R of u -> (1 + cos(pi u / radius))/2 on |u| < radius."""
    x = 2 * radius * np.asarray(xi, dtype=float)
    return radius * np.sinc(x) + 0.5 * radius * (np.sinc(x - 1) + np.sinc(x + 1))


def dilated_bump_observable(d: int, scale: float, x0=None, radius: float = 0.4, K0: int = 16) -> TorusObservable:
    """a(scale (x - x0)) with a the product raised-cosine bump of the given radius.

    a_m = e^{-2 pi i m.x0} scale^{-d} prod_i A(m_i/scale), truncated at |m|_inf <= K0 * scale.
    """
    if scale < 1 or radius >= 0.5:
        raise ValidationError("need scale >= 1 and radius < 1/2 so the support fits in one period")
    x0 = np.zeros(d) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    K = int(np.ceil(K0 * scale))
    axes = np.arange(-K, K + 1)
    modes = np.array(np.meshgrid(*[axes] * d, indexing="ij")).reshape(d, -1).T
    amp = np.prod(raised_cosine_ft(modes / scale, radius), axis=1) / scale ** d
    vals = amp * np.exp(-2j * np.pi * modes @ x0)
    keep = np.abs(vals) > 1e-16 * np.abs(vals).max()
    return TorusObservable(modes[keep], vals[keep])


# ------------------------------------------------------------ expectations

class TermBreakdown(NamedTuple):
    value: complex
    term1: complex  # m = 0
    term2: complex  # m != 0, zero frequency
    term3: complex  # oscillatory remainder


def _pairs(phi: TruncatedState, psi: TruncatedState, a: TorusObservable, tol: float | None = None):
    """Yield (m-value, psi_l conj(phi_{l+m}), omega, resonant mask, is_zero_mode)."""
    if phi.d != psi.d or a.d != psi.d:
        raise ValidationError("state and observable dimensions differ")
    if phi.b != psi.b:
        raise ValidationError("states live on different tori")
    b = psi.b
    unit = _is_unit(b)
    lam_psi = _eig(psi.modes, b)
    idx_phi = phi.index()
    scale = max(float(np.max(lam_psi)) if len(lam_psi) else 0.0, 1.0)
    for m, am in zip(a.modes, a.values):
        shifted = psi.modes + m
        j = idx_phi.find(shifted)
        ok = j >= 0
        if not np.any(ok):
            continue
        prod = psi.coeffs[ok] * np.conj(phi.coeffs[j[ok]])
        if unit:
            D = np.sum(shifted[ok] ** 2, axis=1) - np.sum(psi.modes[ok] ** 2, axis=1)
            res = D == 0
            omega = FOUR_PI2 * D
        else:
            omega = _eig(shifted[ok], b) - lam_psi[ok]
            res = np.abs(omega) <= (1e-9 * scale if tol is None else tol)
        yield am, prod, np.where(res, 0.0, omega), res, not np.any(m)


def _expand(phi, psi, a, kernel) -> TermBreakdown:
    t1 = t2 = t3 = 0j
    for am, prod, omega, res, zero in _pairs(phi, psi, a):
        if zero:
            t1 += am * np.sum(prod)
            continue
        t2 += am * np.sum(prod[res])
        if np.any(~res):
            t3 += am * np.sum(prod[~res] * kernel(omega[~res]))
    return TermBreakdown(t1 + t2 + t3, t1, t2, t3)


def averaged_matrix_element(phi: TruncatedState, psi: TruncatedState, a: TorusObservable, T: float) -> TermBreakdown:
    """(1/T) int_0^T <e^{itD} phi, a e^{itD} psi> dt in closed form."""
    if not T > 0:
        raise ValidationError("T must be positive")
    return _expand(phi, psi, a, lambda w: kappa(w, T))


def averaged_expectation(state: TruncatedState, a: TorusObservable, T: float) -> TermBreakdown:
    return averaged_matrix_element(state, state, a, T)


def limit_matrix_element(phi: TruncatedState, psi: TruncatedState, a: TorusObservable) -> TermBreakdown:
    """T -> infinity: only zero-frequency pairs survive."""
    return _expand(phi, psi, a, lambda w: np.zeros_like(w, dtype=complex))


def instantaneous_matrix_element(phi, psi, a, t: float) -> TermBreakdown:
    return _expand(phi, psi, a, lambda w: np.exp(1j * t * w))


def instantaneous_expectation(state: TruncatedState, a: TorusObservable, t: float) -> complex:
    return instantaneous_matrix_element(state, state, a, t).value


def discrete_kernel(omega, T: int):
    """(1/T) sum_{t=0}^{T-1} e^{i t omega}; returns (values, number of flagged omega in 2 pi Z)."""
    omega = np.asarray(omega, dtype=float)
    z = np.exp(1j * omega)
    flat = np.abs(z - 1) < 1e-12
    zs = np.where(flat, 0.0, z)
    val = (np.exp(1j * T * omega) - 1) / (T * (zs - 1))
    return np.where(flat, 1.0, val), int(np.sum(flat))


def discrete_time_average(state: TruncatedState, a: TorusObservable, T_int: int, phi=None) -> TermBreakdown:
    """(1/T) sum_{t=0}^{T-1} <e^{itD} phi, a e^{itD} psi>.

    Unlike the continuous kernel, |e^{i omega} - 1|^{-1} has no uniform lower
    bound in E, so the E-uniform decay of the third term does not carry over.
    """
    if int(T_int) != T_int or T_int < 1:
        raise ValidationError("T_int must be a positive integer")
    phi = state if phi is None else phi
    return _expand(phi, state, a, lambda w: discrete_kernel(w, int(T_int))[0])


def cross_point_average(x, y, E: float, a: TorusObservable, T: float, b=None) -> TermBreakdown:
    """(1/T) int_0^T <e^{itD} delta_x^E, a e^{itD} delta_y^E> dt for x != y."""
    if np.allclose(np.atleast_1d(x), np.atleast_1d(y)):
        raise ValidationError("cross_point_average needs x != y")
    return averaged_matrix_element(sharp_state(x, E, b), sharp_state(y, E, b), a, T)


def position_space_average(phi: TruncatedState, psi: TruncatedState, a: TorusObservable, T: float) -> TermBreakdown:
    if phi.kind not in ("box", "tensor") or psi.kind not in ("box", "tensor"):
        raise ValidationError("position_space_average expects tensor-kind states")
    return averaged_matrix_element(phi, psi, a, T)


def inner_product(phi: TruncatedState, psi: TruncatedState) -> complex:
    j = phi.index().find(psi.modes)
    ok = j >= 0
    return complex(np.sum(np.conj(phi.coeffs[j[ok]]) * psi.coeffs[ok]))


# ------------------------------------------------------------- experiments

class SweepRow(NamedTuple):
    E: float
    T: float
    value: complex
    reference: complex
    abs_error: float
    term2: complex
    term3: complex


def energy_sweep(y, E_list, a: TorusObservable, T: float = 1.0, b=None) -> list:
    rows = []
    for E in E_list:
        st = sharp_state(y, E, b)
        tb = averaged_expectation(st, a, T)
        ref = a.mean
        rows.append(SweepRow(float(E), float(T), tb.value, ref, abs(tb.value - ref), tb.term2, tb.term3))
    return rows


def shrinking_observable_sweep(y, E_list, x0, beta: float, radius: float = 0.4, T: float = 1.0, K0: int = 16) -> list:
    """Rows (E, scale, value, integral of a^E, |value - integral|)."""
    y = np.atleast_1d(y)
    d = len(y)
    rows = []
    for E in E_list:
        s = float(E) ** beta
        a = dilated_bump_observable(d, s, x0, radius, K0)
        val = averaged_expectation(sharp_state(y, E), a, T).value
        ref = a.mean
        rows.append((float(E), s, val, ref, abs(val - ref)))
    return rows


class DensityProfile(NamedTuple):
    grid: np.ndarray  # (G, d) sample points
    values: np.ndarray
    mass: float

    @property
    def max_min_ratio(self) -> float:
        return float(self.values.max() / self.values.min())


def density_fourier(state: TruncatedState, T: float):
    """Coefficient matrix C[l, l'] with mu(x) = sum C[l, l'] e_{l - l'}(x)."""
    lam = state.lam
    c = state.coeffs
    return c[:, None] * np.conj(c)[None, :] * kappa(lam[None, :] - lam[:, None], T)


def density_profile(state: TruncatedState, T: float, grid_resolution: int = 256) -> DensityProfile:
    """(1/T) int_0^T |e^{itD} psi(x)|^2 dt on a uniform grid."""
    if grid_resolution < 8:
        raise ValidationError("grid_resolution must be at least 8")
    d = state.d
    axes = [np.arange(grid_resolution) / grid_resolution * bi for bi in state.b]
    pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    U = np.exp(2j * np.pi * (pts / np.asarray(state.b)) @ state.modes.T)
    C = density_fourier(state, T)
    vals = np.einsum("gl,lk,gk->g", U, C, U.conj()).real
    return DensityProfile(pts, vals, float(vals.mean()))


class CounterexampleReport(NamedTuple):
    time_average: complex
    product: complex
    equal_energy: bool


def degenerate_pair_counterexample(j=(1, 0), k=(0, 1)) -> CounterexampleReport:
    """phi = e_j, psi = e_k, a = e_{j-k}: the limit is <e_j, a e_k> = 1 when lambda_j = lambda_k."""
    j, k = np.asarray(j), np.asarray(k)
    phi, psi = mode_state(j), mode_state(k)
    a = mode_observable(j - k)
    lim = limit_matrix_element(phi, psi, a).value
    prod = inner_product(phi, psi) * a.mean
    return CounterexampleReport(lim, prod, bool(np.sum(j * j) == np.sum(k * k)))


def half_integer_energy(K: int) -> float:
    """E = pi^2 (2K+1)^2, where sqrt(E)/(2 pi) = K + 1/2 is a half-integer."""
    return float(np.pi ** 2 * (2 * K + 1) ** 2)


def revival_constant(E: float) -> float:
    return (np.sqrt(E) - np.pi) / np.sqrt(E)
