"""Dense spectral machinery for finite Hermitian Hamiltonians.

Eigenvalues are clustered into distinct levels, and every time average is
evaluated in closed form from the level projectors. No time stepping happens
here; see ``equiwalk.oracles`` for the quadrature reference used in tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

MAX_DIM = 4096
DEFAULT_REL_TOL = 1e-9
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct levels ``energies[k]`` with orthonormal eigenvectors.

    The projector of level k is ``V_k V_k^*`` with ``V_k = eigvecs[:, slices[k]]``.
    Projectors are built lazily because the dense (m, D, D) stack is rarely needed.
    """

    energies: np.ndarray
    eigvecs: np.ndarray
    slices: tuple
    grouping_tolerance: float
    raw_eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigvecs.shape[0]

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([s.stop - s.start for s in self.slices])

    def __len__(self) -> int:
        return len(self.energies)

    def projector(self, k: int) -> np.ndarray:
        V = self.eigvecs[:, self.slices[k]]
        return V @ V.conj().T

    @property
    def levels(self) -> list:
        return [(float(E), self.projector(k)) for k, E in enumerate(self.energies)]

    def project(self, psi: np.ndarray) -> np.ndarray:
        """Rows are P_k psi for every level k, shape (m, D)."""
        psi = _as_state(psi, self.dim)
        c = self.eigvecs.conj().T @ psi
        out = np.empty((len(self.slices), self.dim), dtype=complex)
        for k, s in enumerate(self.slices):
            out[k] = self.eigvecs[:, s] @ c[s]
        return out

    def min_gap(self) -> float:
        if len(self.energies) < 2:
            return np.inf
        return float(np.min(np.diff(self.energies)))


def _as_state(psi, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape[0] != dim:
        raise ValidationError(f"state has dimension {psi.shape[0]}, operator has {dim}")
    return psi


def _as_observable(a, dim: int) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 1 or (a.ndim > 1 and a.size == dim):
        a = a.reshape(-1)
        if a.shape[0] != dim:
            raise ValidationError(f"observable has {a.shape[0]} sites, operator has {dim}")
        return a
    if a.shape != (dim, dim):
        raise ValidationError(f"observable shape {a.shape} does not match dimension {dim}")
    return a


def _apply(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    # diagonal observables are stored as site vectors
    if a.ndim == 1:
        return a[..., :] * x
    return x @ a.T


def check_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {H.shape}")
    if H.shape[0] > MAX_DIM:
        raise ValidationError(f"dimension {H.shape[0]} exceeds dense cap {MAX_DIM}")
    if not np.all(np.isfinite(H)):
        raise ValidationError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(H))))
    dev = float(np.max(np.abs(H - H.conj().T)))
    if dev > tol * scale:
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return H


def cluster_sorted(values: np.ndarray, tol: float) -> list:
    """Split sorted values into runs whose consecutive gaps are <= tol."""
    if len(values) == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    edges = np.concatenate(([0], breaks, [len(values)]))
    return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def eigendecompose(H, grouping_tolerance: float | None = None, check: bool = True) -> SpectralDecomposition:
    H = check_hermitian(H)
    # symmetrize so eigh sees an exactly Hermitian matrix
    H = 0.5 * (H + H.conj().T)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")
    if grouping_tolerance is None:
        grouping_tolerance = DEFAULT_REL_TOL * max(float(np.max(np.abs(w))), 1.0)
    if not grouping_tolerance > 0:
        raise ValidationError("grouping_tolerance must be positive")
    slices = cluster_sorted(w, grouping_tolerance)
    energies = np.array([w[s].mean() for s in slices])
    dec = SpectralDecomposition(energies, V, tuple(slices), float(grouping_tolerance), w)
    if check:
        check_projectors(dec)
    return dec


def check_projectors(dec: SpectralDecomposition, tol: float = 1e-10) -> None:
    """Idempotence, orthogonality and completeness of the level projectors.

    With orthonormal eigenvectors these reduce to V^*V = I, which is checked
    once instead of forming every product P_k P_j.
    """
    V = dec.eigvecs
    D = V.shape[0]
    gram = V.conj().T @ V
    err = float(np.max(np.abs(gram - np.eye(D))))
    if err > tol:
        raise NumericalError(f"eigenvectors not orthonormal (error {err:.3e})")
    if np.any(np.diff(dec.energies) <= dec.grouping_tolerance):
        raise NumericalError("levels are not separated by the grouping tolerance")


def evolve(dec: SpectralDecomposition, psi0, t: float) -> np.ndarray:
    psi0 = _as_state(psi0, dec.dim)
    c = dec.eigvecs.conj().T @ psi0
    phase = np.exp(-1j * t * dec.raw_eigenvalues)
    # use the level energy for every member so degenerate levels share one phase
    for k, s in enumerate(dec.slices):
        phase[s] = np.exp(-1j * t * dec.energies[k])
    return dec.eigvecs @ (phase * c)


def infinite_time_average_density(dec: SpectralDecomposition, psi0) -> np.ndarray:
    P = dec.project(psi0)
    return np.sum(np.abs(P) ** 2, axis=0)


def kappa(omega, T: float) -> np.ndarray:
    """(1/T) * integral_0^T exp(i t omega) dt, equal to 1 at omega = 0."""
    x = np.asarray(omega, dtype=float) * T
    small = np.abs(x) < 1e-6
    xs = np.where(small, 1.0, x)
    big = (np.exp(1j * xs) - 1.0) / (1j * xs)
    series = 1.0 + 1j * x / 2 - x * x / 6
    return np.where(small, series, big)


def window_kernel(omega, T: float, width: float = 1.0) -> np.ndarray:
    """(1/width) * integral_{T-width}^T exp(i t omega) dt."""
    omega = np.asarray(omega, dtype=float)
    return np.exp(1j * (T - width) * omega) * kappa(omega, width)


def _pair_matrix(dec: SpectralDecomposition, psi0, a, phi=None) -> np.ndarray:
    """M[k, j] = <P_k phi, a P_j psi>."""
    a = _as_observable(a, dec.dim)
    Ppsi = dec.project(psi0)
    Pphi = Ppsi if phi is None else dec.project(phi)
    return Pphi.conj() @ _apply(a, Ppsi).T


def time_averaged_expectation(dec: SpectralDecomposition, psi0, a, T: float, phi=None) -> complex:
    """Exact (1/T) * integral_0^T <e^{-itH} phi, a e^{-itH} psi0> dt, phi defaulting to psi0."""
    if not T > 0:
        raise ValidationError("T must be positive")
    M = _pair_matrix(dec, psi0, a, phi)
    omega = dec.energies[:, None] - dec.energies[None, :]
    return complex(np.sum(kappa(omega, T) * M))


def windowed_time_average_expectation(dec, psi0, a, T: float, width: float = 1.0, phi=None) -> complex:
    if not width > 0 or T < width:
        raise ValidationError("need 0 < width <= T")
    M = _pair_matrix(dec, psi0, a, phi)
    omega = dec.energies[:, None] - dec.energies[None, :]
    return complex(np.sum(window_kernel(omega, T, width) * M))


def infinite_time_average_expectation(dec: SpectralDecomposition, psi0, a, phi=None) -> complex:
    """sum_k <P_k phi, a P_k psi0>, the T -> infinity limit."""
    M = _pair_matrix(dec, psi0, a, phi)
    return complex(np.trace(M))


def instantaneous_expectation(dec: SpectralDecomposition, psi0, a, t: float, phi=None) -> complex:
    a = _as_observable(a, dec.dim)
    psi = evolve(dec, psi0, t)
    chi = psi if phi is None else evolve(dec, phi, t)
    return complex(np.vdot(chi, _apply(a, psi)))


def zero_energy_projection_average(dec: SpectralDecomposition, phi, psi) -> complex:
    phi = _as_state(phi, dec.dim)
    psi = _as_state(psi, dec.dim)
    hits = np.flatnonzero(np.abs(dec.energies) <= dec.grouping_tolerance)
    if len(hits) == 0:
        return 0j
    V = dec.eigvecs[:, dec.slices[int(hits[0])]]
    return complex(np.vdot(V.conj().T @ phi, V.conj().T @ psi))
