"""Quantum walks on the discrete torus Lambda_N = [0, N-1]^d.

The adjacency operator A_N is diagonal in the Fourier basis
e_m(n) = N^{-d/2} exp(2 pi i m.n / N) with eigenvalues
lambda_m = sum_i 2 cos(2 pi m_i / N). Infinite-time averages are computed
from resonance sets A_m = {l : lambda_{l+m} = lambda_l}.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .spectral import kappa, window_kernel

MAX_SITES = 1 << 22
RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class LatticeTorus:
    d: int
    N: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError("d must be a positive integer")
        if int(self.N) != self.N or self.N < 2:
            raise ValidationError("N must be an integer >= 2")
        if self.N ** self.d > MAX_SITES:
            raise ValidationError(f"N^d = {self.N ** self.d} exceeds the site cap {MAX_SITES}")

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N ** self.d

    def site(self, v) -> tuple:
        v = tuple(int(x) for x in np.atleast_1d(v))
        if len(v) != self.d or any(x < 0 or x >= self.N for x in v):
            raise ValidationError(f"site {v} not in Lambda_N for N={self.N}, d={self.d}")
        return v

    def index(self, v) -> int:
        return int(np.ravel_multi_index(self.site(v), self.shape))

    def point_mass(self, v) -> np.ndarray:
        psi = np.zeros(self.shape, dtype=complex)
        psi[self.site(v)] = 1.0
        return psi


def eigenvalue(torus: LatticeTorus, k) -> float:
    k = torus.site(k)
    return float(sum(2.0 * np.cos(2 * np.pi * ki / torus.N) for ki in k))


def eigenvalues(torus: LatticeTorus) -> np.ndarray:
    c = 2.0 * np.cos(2 * np.pi * np.arange(torus.N) / torus.N)
    lam = np.zeros(torus.shape)
    for i in range(torus.d):
        sh = [1] * torus.d
        sh[i] = torus.N
        lam = lam + c.reshape(sh)
    return lam


def adjacency_matrix(torus: LatticeTorus) -> np.ndarray:
    """Dense A_N in C order; only meant for small oracle checks."""
    n = torus.size
    A = np.zeros((n, n))
    idx = np.arange(n).reshape(torus.shape)
    for i in range(torus.d):
        for s in (1, -1):
            nb = np.roll(idx, -s, axis=i)
            np.add.at(A, (idx.ravel(), nb.ravel()), 1.0)
    return A


def fourier_basis_vector(torus: LatticeTorus, m) -> np.ndarray:
    m = np.array(torus.site(m))
    grids = np.indices(torus.shape)
    phase = np.tensordot(m, grids, axes=1)
    return np.exp(2j * np.pi * phase / torus.N) / torus.N ** (torus.d / 2)


def evolve_point_mass(torus: LatticeTorus, v, t: float) -> np.ndarray:
    """e^{-itA_N} delta_v via FFT, returned with shape torus.shape."""
    return evolve(torus, torus.point_mass(v), t)


def evolve(torus: LatticeTorus, psi0, t: float) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex).reshape(torus.shape)
    c = np.fft.fftn(psi0, norm="ortho")
    return np.fft.ifftn(np.exp(-1j * t * eigenvalues(torus)) * c, norm="ortho")


# ---------------------------------------------------------------- observables

@dataclass(frozen=True)
class LatticeObservable:
    """Observable a_N on Lambda_N held by its coefficients a_m = <e_m, a>.

    ``samples`` gives the site values a(n) = sum_m a_m e_m(n).
    """

    torus: LatticeTorus
    coeffs: np.ndarray
    source: str = "raw"

    @classmethod
    def from_samples(cls, torus: LatticeTorus, samples, source: str = "raw") -> "LatticeObservable":
        samples = np.asarray(samples, dtype=complex).reshape(torus.shape)
        return cls(torus, np.fft.fftn(samples, norm="ortho"), source)

    @property
    def samples(self) -> np.ndarray:
        return np.fft.ifftn(self.coeffs, norm="ortho")

    @property
    def mean(self) -> complex:
        """<a> = N^{-d} sum_n a(n) = a_0 e_0."""
        return complex(self.coeffs[(0,) * self.torus.d] / self.torus.N ** (self.torus.d / 2))

    def weighted_coeffs(self, v) -> np.ndarray:
        """a_m e_m(v) for every m."""
        return self.coeffs * fourier_basis_vector(self.torus, v)

    def coefficient_l1(self, v) -> float:
        return float(np.sum(np.abs(self.weighted_coeffs(v))))


def scaled_function_observable(torus: LatticeTorus, fhat: dict) -> LatticeObservable:
    """a_N(n) = f(n/N) for the trigonometric polynomial f(x) = sum_k fhat[k] e^{2 pi i k.x}.

    Frequencies are folded modulo N, so a_m = N^{d/2} sum_{k = m mod N} fhat[k].
    """
    coeffs = np.zeros(torus.shape, dtype=complex)
    scale = torus.N ** (torus.d / 2)
    for k, val in fhat.items():
        k = tuple(np.atleast_1d(k))
        if len(k) != torus.d:
            raise ValidationError(f"frequency {k} has wrong dimension")
        coeffs[tuple(int(x) % torus.N for x in k)] += scale * complex(val)
    return LatticeObservable(torus, coeffs, "scaled-function")


def l1_restriction_observable(torus: LatticeTorus, values: dict) -> LatticeObservable:
    """Restriction to Lambda_N of a finitely supported a on Z^d."""
    samples = np.zeros(torus.shape, dtype=complex)
    for n, val in values.items():
        n = tuple(np.atleast_1d(n))
        if len(n) != torus.d:
            raise ValidationError(f"site {n} has wrong dimension")
        if all(0 <= x < torus.N for x in n):
            samples[n] += complex(val)
    return LatticeObservable.from_samples(torus, samples, "l1-restriction")


def random_fourier_coefficients(d: int, K: int = 16, seed: int = 0, decay: float = 2.0) -> dict:
    """Random complex fhat on |k|_inf <= K with |fhat_k| ~ (1+|k|)^{-decay}, Hermitian-symmetric."""
    rng = np.random.default_rng(seed)
    out = {}
    grid = np.array(np.meshgrid(*[np.arange(-K, K + 1)] * d, indexing="ij")).reshape(d, -1).T
    for k in grid:
        k = tuple(int(x) for x in k)
        neg = tuple(-x for x in k)
        if neg in out:
            out[k] = np.conj(out[neg])
            continue
        amp = (1.0 + np.linalg.norm(k)) ** (-decay)
        z = amp * (rng.normal() + 1j * rng.normal())
        out[k] = z.real if k == neg else z
    return out


@dataclass(frozen=True)
class ObservableSpec:
    """N-independent description of an observable family, serializable to JSON."""

    kind: str
    data: object = field(default=None)

    def realize(self, torus: LatticeTorus) -> LatticeObservable:
        if self.kind == "fourier":
            return scaled_function_observable(torus, {tuple(k): complex(re, im) for k, re, im in self.data})
        if self.kind == "l1":
            return l1_restriction_observable(torus, {tuple(n): complex(re, im) for n, re, im in self.data})
        if self.kind == "samples":
            shape = tuple(self.data["shape"])
            if shape != torus.shape:
                raise ValidationError(f"sample shape {shape} does not match torus {torus.shape}")
            re = np.asarray(self.data["re"], dtype=float)
            im = np.asarray(self.data.get("im", np.zeros_like(re)), dtype=float)
            return LatticeObservable.from_samples(torus, (re + 1j * im).reshape(shape))
        raise ValidationError(f"unknown observable kind {self.kind!r}")

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "data": self.data})

    @classmethod
    def from_json(cls, text) -> "ObservableSpec":
        obj = json.loads(text) if isinstance(text, str) else dict(text)
        if obj.get("kind") not in ("fourier", "samples", "l1"):
            raise ValidationError(f"observable kind must be fourier, samples or l1, got {obj.get('kind')!r}")
        if "data" not in obj:
            raise ValidationError("observable JSON needs a 'data' field")
        return cls(obj["kind"], obj["data"])

    @classmethod
    def from_fourier(cls, fhat: dict) -> "ObservableSpec":
        data = [[list(np.atleast_1d(k).tolist()), float(np.real(v)), float(np.imag(v))] for k, v in fhat.items()]
        return cls("fourier", data)


# ----------------------------------------------------------------- resonances

@dataclass(frozen=True)
class ResonanceSet:
    m: tuple
    members: np.ndarray  # (count, d) integer array

    def __len__(self) -> int:
        return len(self.members)


def _resonance_members(N: int, d: int, m: tuple) -> np.ndarray:
    # Fix the free coordinates l_hat; the coordinate j with m_j != 0 must solve
    # cos(2 pi (l_j + m_j)/N) - cos(2 pi l_j/N) = c, i.e.
    # -2 sin(pi (2 l_j + m_j)/N) sin(pi m_j/N) = c, giving at most two l_j per l_hat.
    j = next(i for i, x in enumerate(m) if x % N)
    others = [i for i in range(d) if i != j]
    cosN = np.cos(2 * np.pi * np.arange(N) / N)
    if others:
        free = np.indices((N,) * len(others)).reshape(len(others), -1).T
    else:
        free = np.zeros((1, 0), dtype=int)
    c = np.zeros(len(free))
    for col, i in enumerate(others):
        li = free[:, col]
        c -= cosN[(li + m[i]) % N] - cosN[li]
    s = -c / (2 * np.sin(np.pi * m[j] / N))
    ok = np.abs(s) <= 1 + 1e-12
    theta = np.arcsin(np.clip(s, -1, 1))
    found = []
    for x in (N * theta / np.pi, N - N * theta / np.pi):
        lj = (x - m[j]) / 2
        # 2 l_j + m_j is fixed modulo 2N, so l_j is fixed modulo N
        r = np.rint(lj)
        hit = ok & (np.abs(lj - r) < 1e-6)
        found.append((np.flatnonzero(hit), r[hit].astype(int) % N))
    rows = set()
    for idx, lj in found:
        for p, q in zip(idx, lj):
            full = [0] * d
            full[j] = int(q)
            for col, i in enumerate(others):
                full[i] = int(free[p, col])
            rows.add(tuple(full))
    if not rows:
        return np.zeros((0, d), dtype=int)
    cand = np.array(sorted(rows), dtype=int)
    # confirm each candidate by direct comparison of eigenvalues
    lam_a = np.sum(2 * cosN[(cand + np.array(m)) % N], axis=1)
    lam_b = np.sum(2 * cosN[cand], axis=1)
    return cand[np.abs(lam_a - lam_b) <= RESONANCE_TOL]


@lru_cache(maxsize=65536)
def _resonance_cached(N: int, d: int, m: tuple) -> np.ndarray:
    members = _resonance_members(N, d, m)
    if len(members) > 2 * N ** (d - 1):
        raise AssertionError(f"resonance set for m={m} has {len(members)} > 2N^(d-1) members")
    members.setflags(write=False)
    return members


def resonance_set(torus: LatticeTorus, m) -> ResonanceSet:
    m = torus.site(m)
    if not any(m):
        raise ValidationError("resonance sets are defined for m != 0")
    return ResonanceSet(m, _resonance_cached(torus.N, torus.d, m))


def resonance_set_bruteforce(torus: LatticeTorus, m, tol: float = RESONANCE_TOL) -> np.ndarray:
    m = np.array(torus.site(m))
    lam = eigenvalues(torus)
    shifted = lam
    for i in range(torus.d):
        shifted = np.roll(shifted, -int(m[i]), axis=i)
    hits = np.argwhere(np.abs(shifted - lam) <= tol)
    return hits


def _nonzero_modes(obs: LatticeObservable, v, rtol: float = 1e-14):
    w = obs.weighted_coeffs(v)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    ms = np.argwhere(np.abs(w) > rtol * scale)
    return [(tuple(int(x) for x in m), w[tuple(m)]) for m in ms if any(m)]


def exact_time_average_limit(torus: LatticeTorus, v, a: LatticeObservable) -> complex:
    """lim_T (1/T) int_0^T <e^{-itA} delta_v, a e^{-itA} delta_v> dt."""
    v = torus.site(v)
    total = a.mean
    for m, w in _nonzero_modes(a, v):
        total += w * len(resonance_set(torus, m)) / torus.size
    return complex(total)


def cross_term_limit(torus: LatticeTorus, v, w, a: LatticeObservable) -> complex:
    """Infinite-time average of <e^{-itA} delta_v, a e^{-itA} delta_w> for v != w."""
    v, w = torus.site(v), torus.site(w)
    if v == w:
        raise ValidationError("cross_term_limit needs v != w; use exact_time_average_limit")
    diff = np.array(v) - np.array(w)
    total = 0j
    for m, c in _nonzero_modes(a, v):
        members = resonance_set(torus, m).members
        if len(members):
            total += c * np.sum(np.exp(2j * np.pi * (members @ diff) / torus.N))
    return complex(total / torus.size)


def general_state_limit(torus: LatticeTorus, phi, psi, a: LatticeObservable) -> complex:
    """Infinite-time average of <e^{-itA} phi, a e^{-itA} psi> by expanding in point masses."""
    phi = np.asarray(phi, dtype=complex).reshape(torus.shape)
    psi = np.asarray(psi, dtype=complex).reshape(torus.shape)
    sv = [tuple(int(x) for x in s) for s in np.argwhere(phi != 0)]
    sw = [tuple(int(x) for x in s) for s in np.argwhere(psi != 0)]
    total = 0j
    for v in sv:
        for w in sw:
            c = np.conj(phi[v]) * psi[w]
            if v == w:
                total += c * exact_time_average_limit(torus, v, a)
            else:
                total += c * cross_term_limit(torus, v, w, a)
    return complex(total)


# ---------------------------------------------------------------- experiments

def _pair_frequencies(torus: LatticeTorus, m: tuple) -> np.ndarray:
    lam = eigenvalues(torus)
    shifted = lam
    for i in range(torus.d):
        shifted = np.roll(shifted, -m[i], axis=i)
    return (shifted - lam).ravel()


def finite_time_average(torus: LatticeTorus, v, a: LatticeObservable, T: float, window: float | None = None) -> complex:
    """Exact (1/T) int_0^T <e^{-itA} delta_v, a e^{-itA} delta_v> dt.

    With ``window`` the average runs over [T - window, T] instead.
    """
    v = torus.site(v)
    total = a.mean
    for m, w in _nonzero_modes(a, v):
        om = _pair_frequencies(torus, m)
        k = kappa(om, T) if window is None else window_kernel(om, T, window)
        total += w * np.sum(k) / torus.size
    return complex(total)


def instantaneous_expectation(torus: LatticeTorus, v, a: LatticeObservable, t: float) -> complex:
    psi = evolve_point_mass(torus, v, t)
    return complex(np.sum(a.samples * np.abs(psi) ** 2))


def corner_observable(torus: LatticeTorus) -> LatticeObservable:
    """a_N(n) = prod_i (1 - n_i/N), i.e. f(x) = prod (1 - x_i) sampled on the grid."""
    x = 1.0 - np.arange(torus.N) / torus.N
    s = np.ones(torus.shape)
    for i in range(torus.d):
        sh = [1] * torus.d
        sh[i] = torus.N
        s = s * x.reshape(sh)
    return LatticeObservable.from_samples(torus, s, "scaled-function")


def invertlim_experiment(d: int, N_list, t: float, v=None, window: float | None = None) -> list:
    """Rows (N, expectation, <a_N>, gap) for f(x) = prod (1 - x_i).

    With ``window`` the expectation is the time average over [0, window]
    (``t`` is then ignored); otherwise it is the value at time t.
    """
    rows = []
    prev = -np.inf
    for N in N_list:
        if N <= prev:
            raise ValidationError("N list must be strictly increasing")
        prev = N
        torus = LatticeTorus(d, int(N))
        a = corner_observable(torus)
        site = (0,) * d if v is None else v
        if window is None:
            val = instantaneous_expectation(torus, site, a, t).real
        else:
            val = finite_time_average(torus, site, a, window).real
        mean = a.mean.real
        rows.append((int(N), val, mean, val - mean))
    return rows


def noav_closed_form(N: int, v: int, t) -> np.ndarray:
    """(e^{2 pi i v/N}/N) sum_l exp(i t b_l), b_l = -4 sin(pi(2l+1)/N) sin(pi/N)."""
    b = noav_frequencies(N)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(2j * np.pi * v / N) / N * np.exp(1j * np.outer(t, b)).sum(axis=1)


def noav_frequencies(N: int) -> np.ndarray:
    ell = np.arange(N)
    return -4 * np.sin(np.pi * (2 * ell + 1) / N) * np.sin(np.pi / N)


def noav_windowed(N: int, v: int, T, width: float = 1.0) -> np.ndarray:
    b = noav_frequencies(N)
    T = np.atleast_1d(np.asarray(T, dtype=float))
    k = np.stack([window_kernel(b, Ti, width) for Ti in T])
    return np.exp(2j * np.pi * v / N) / N * k.sum(axis=1)


def oscillation_amplitude(series) -> float:
    """Largest peak-to-peak spread of the real or imaginary part."""
    series = np.asarray(series)
    return float(max(np.ptp(series.real), np.ptp(series.imag)))


@dataclass(frozen=True)
class NoavSeries:
    times: np.ndarray
    instantaneous: np.ndarray
    windowed: np.ndarray
    tail_start: float

    def tail_amplitudes(self) -> tuple:
        sel = self.times >= self.tail_start
        return oscillation_amplitude(self.instantaneous[sel]), oscillation_amplitude(self.windowed[sel])


def noav_experiment(N: int, v: int, times, tail_start: float = 500.0) -> NoavSeries:
    times = np.asarray(times, dtype=float)
    inst = noav_closed_form(N, v, times)
    win_t = np.maximum(times, 1.0)
    win = noav_windowed(N, v, win_t)
    return NoavSeries(times, inst, win, tail_start)


def min_level_gap(torus: LatticeTorus) -> float:
    lam = np.unique(np.round(eigenvalues(torus).ravel(), 12))
    return float(np.min(np.diff(lam))) if len(lam) > 1 else np.inf


def simultaneous_limit_check(torus_d: int, v, a_of_torus, T_of_N, N_list) -> list:
    """Rows (N, T, correction bound, |finite-T value - limit|, limit).

    The bound is sum_{m != 0} |a_m e_m(v)| * (2/T) / (min distinct-eigenvalue gap).
    """
    rows = []
    for N in N_list:
        torus = LatticeTorus(torus_d, int(N))
        a = a_of_torus(torus)
        T = float(T_of_N(N))
        site = tuple(v) if v is not None else (0,) * torus_d
        l1 = sum(abs(w) for _, w in _nonzero_modes(a, site))
        bound = l1 * 2.0 / (T * min_level_gap(torus)) if l1 else 0.0
        lim = exact_time_average_limit(torus, site, a)
        fin = finite_time_average(torus, site, a, T)
        rows.append((int(N), T, bound, abs(fin - lim), lim.real))
    return rows
