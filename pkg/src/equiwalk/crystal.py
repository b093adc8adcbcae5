"""Z^d-periodic graphs with a finite fundamental cell, reduced by the Floquet transform.

States on the periodized graph Gamma_N are arrays of shape (N,)*d + (nu,):
``psi[k..., i]`` is the amplitude on vertex v_i of cell k. The Floquet
transform is an orthonormal DFT over the cell axes, which block-diagonalizes
H_N into the fiber matrices H(r/N), r in [0, N-1]^d.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

import numpy as np

from . import spectral
from .errors import ValidationError

MAX_OFFSET = 8
SHIPPED_GRAPHS = ("zd", "ladder", "strip3", "cylinder4", "honeycomb", "triangular", "flatband")


@dataclass(frozen=True)
class PeriodicGraphSpec:
    d: int
    nu: int
    edges: tuple  # of (i, j, offset tuple)
    potential: tuple
    name: str = ""

    def __post_init__(self):
        if self.d < 1 or self.nu < 1:
            raise ValidationError("d and nu must be positive")
        if len(self.potential) != self.nu:
            raise ValidationError(f"potential has {len(self.potential)} entries, expected nu={self.nu}")
        for i, j, o in self.edges:
            if not (0 <= i < self.nu and 0 <= j < self.nu):
                raise ValidationError(f"edge ({i}, {j}) refers to a vertex outside the cell")
            if len(o) != self.d:
                raise ValidationError(f"edge offset {o} has wrong dimension")
            if any(abs(x) > MAX_OFFSET for x in o):
                raise ValidationError(f"edge offset {o} exceeds |o_i| <= {MAX_OFFSET}")
        missing = _missing_reverse(self.edges)
        if missing:
            raise ValidationError(f"edge list is not symmetric; missing reverses of {missing[:3]}")
        if not _quotient_connected(self.nu, self.edges):
            warnings.warn("quotient graph of the cell is disconnected", stacklevel=2)

    @classmethod
    def from_dict(cls, obj: dict, name: str = "", symmetrize: bool = True) -> "PeriodicGraphSpec":
        errors = []
        for key in ("d", "nu", "edges"):
            if key not in obj:
                errors.append(f"missing field {key!r}")
        if errors:
            raise ValidationError("; ".join(errors))
        d, nu = int(obj["d"]), int(obj["nu"])
        edges = []
        for n, e in enumerate(obj["edges"]):
            try:
                i, j, o = e
                edges.append((int(i), int(j), tuple(int(x) for x in o)))
            except (TypeError, ValueError):
                raise ValidationError(f"edges[{n}] must be [i, j, [o_1..o_d]]") from None
        potential = tuple(float(q) for q in obj.get("potential", [0.0] * nu))
        missing = _missing_reverse(edges)
        if missing and symmetrize:
            warnings.warn(f"adding {len(missing)} reverse edges to make the edge list symmetric", stacklevel=2)
            edges += [(j, i, tuple(-x for x in o)) for i, j, o in missing]
        return cls(d, nu, tuple(edges), potential, name)

    def to_dict(self) -> dict:
        return {"d": self.d, "nu": self.nu,
                "edges": [[i, j, list(o)] for i, j, o in self.edges],
                "potential": list(self.potential)}

    @property
    def shape(self):
        return self.d, self.nu


def _missing_reverse(edges) -> list:
    # multiset comparison so repeated edges need repeated reverses
    from collections import Counter
    have = Counter((i, j, tuple(o)) for i, j, o in edges)
    out = []
    for (i, j, o), c in have.items():
        rev = (j, i, tuple(-x for x in o))
        if have.get(rev, 0) < c:
            out.extend([(i, j, o)] * (c - have.get(rev, 0)))
    return out


def _quotient_connected(nu: int, edges) -> bool:
    parent = list(range(nu))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, _ in edges:
        parent[find(i)] = find(j)
    return len({find(x) for x in range(nu)}) == 1


def load_graph(name_or_path) -> PeriodicGraphSpec:
    """Load a shipped graph by name (see SHIPPED_GRAPHS) or a JSON file path."""
    if str(name_or_path) in SHIPPED_GRAPHS:
        text = resources.files("equiwalk.data.graphs").joinpath(f"{name_or_path}.json").read_text()
        return PeriodicGraphSpec.from_dict(json.loads(text), name=str(name_or_path))
    with open(name_or_path) as fh:
        return PeriodicGraphSpec.from_dict(json.load(fh), name=str(name_or_path))


def zd(d: int) -> PeriodicGraphSpec:
    edges = []
    for i in range(d):
        for s in (1, -1):
            o = [0] * d
            o[i] = s
            edges.append((0, 0, tuple(o)))
    return PeriodicGraphSpec(d, 1, tuple(edges), (0.0,), f"z{d}")


# ------------------------------------------------------------------ Floquet

def build_floquet_matrix(spec: PeriodicGraphSpec, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (spec.d,):
        raise ValidationError(f"theta must have {spec.d} components")
    H = np.diag(np.asarray(spec.potential, dtype=complex))
    for i, j, o in spec.edges:
        H[i, j] += np.exp(2j * np.pi * np.dot(theta, o))
    return H


def grid_points(d: int, N: int) -> np.ndarray:
    """All r in [0, N-1]^d in C order, shape (N^d, d)."""
    return np.indices((N,) * d).reshape(d, -1).T


def state_shape(spec: PeriodicGraphSpec, N: int) -> tuple:
    return (N,) * spec.d + (spec.nu,)


def _as_crystal_state(spec, N, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    shape = state_shape(spec, N)
    if psi.size != int(np.prod(shape)):
        raise ValidationError(f"state has {psi.size} entries, expected {int(np.prod(shape))}")
    return psi.reshape(shape)


def floquet_transform(spec: PeriodicGraphSpec, N: int, psi) -> np.ndarray:
    """(U psi)_r(v_i) = N^{-d/2} sum_k exp(-2 pi i r.k/N) psi(v_i + k)."""
    psi = _as_crystal_state(spec, N, psi)
    return np.fft.fftn(psi, axes=tuple(range(spec.d)), norm="ortho")


def inverse_floquet_transform(spec: PeriodicGraphSpec, N: int, phi) -> np.ndarray:
    phi = _as_crystal_state(spec, N, phi)
    return np.fft.ifftn(phi, axes=tuple(range(spec.d)), norm="ortho")


def point_mass_state(spec: PeriodicGraphSpec, N: int, p: int, cell=None) -> np.ndarray:
    if not 0 <= p < spec.nu:
        raise ValidationError(f"cell vertex {p} out of range")
    psi = np.zeros(state_shape(spec, N), dtype=complex)
    cell = (0,) * spec.d if cell is None else tuple(cell)
    psi[cell + (p,)] = 1.0
    return psi


def cell_uniform_state(spec: PeriodicGraphSpec, N: int, cell=None) -> np.ndarray:
    psi = np.zeros(state_shape(spec, N), dtype=complex)
    cell = (0,) * spec.d if cell is None else tuple(cell)
    psi[cell] = 1.0 / np.sqrt(spec.nu)
    return psi


def dense_hamiltonian(spec: PeriodicGraphSpec, N: int) -> np.ndarray:
    """H_N on Gamma_N; row index is ravel(k) * nu + i."""
    dim = spec.nu * N ** spec.d
    if dim > spectral.MAX_DIM:
        raise ValidationError(f"nu N^d = {dim} exceeds the dense cap {spectral.MAX_DIM}")
    cells = grid_points(spec.d, N)
    H = np.zeros((dim, dim), dtype=complex)
    base = np.ravel_multi_index(cells.T, (N,) * spec.d) * spec.nu
    for i, j, o in spec.edges:
        nb = np.ravel_multi_index(((cells + np.array(o)) % N).T, (N,) * spec.d) * spec.nu
        np.add.at(H, (base + i, nb + j), 1.0)
    H[np.arange(dim), np.arange(dim)] += np.tile(np.asarray(spec.potential), N ** spec.d)
    return H


# --------------------------------------------------------------- band grid

@dataclass(frozen=True)
class BandGrid:
    spec: PeriodicGraphSpec
    N: int
    points: np.ndarray  # (N^d, d) integer r
    decomps: tuple  # SpectralDecomposition per r
    raw: np.ndarray  # (N^d, nu) sorted eigenvalues with multiplicity
    grouping_tolerance: float

    def level_counts(self) -> np.ndarray:
        return np.array([len(dc) for dc in self.decomps])

    def crossing_points(self) -> np.ndarray:
        """Grid points whose number of distinct levels differs from the most common count."""
        counts = self.level_counts()
        modal = np.bincount(counts).argmax()
        return self.points[counts != modal]

    def flat_index(self, r) -> int:
        return int(np.ravel_multi_index(tuple(int(x) % self.N for x in r), (self.N,) * self.spec.d))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"r{i + 1}" for i in range(self.spec.d)] + ["band_index", "energy", "degeneracy"])
            for r, dc in zip(self.points, self.decomps):
                for s, (E, mult) in enumerate(zip(dc.energies, dc.multiplicities)):
                    w.writerow([int(x) for x in r] + [s, f"{E:.17g}", int(mult)])


def default_grid_tolerance(spec: PeriodicGraphSpec) -> float:
    # crude bound on the spectral radius of every fiber matrix
    rho = len(spec.edges) + max(abs(q) for q in spec.potential)
    return spectral.DEFAULT_REL_TOL * max(rho, 1.0)


def band_grid(spec: PeriodicGraphSpec, N: int, grouping_tolerance: float | None = None) -> BandGrid:
    if N < 2:
        raise ValidationError("N must be at least 2")
    tol = default_grid_tolerance(spec) if grouping_tolerance is None else grouping_tolerance
    pts = grid_points(spec.d, N)
    decs = tuple(spectral.eigendecompose(build_floquet_matrix(spec, r / N), tol) for r in pts)
    raw = np.stack([dc.raw_eigenvalues for dc in decs])
    return BandGrid(spec, N, pts, decs, raw, float(tol))


def floquet_condition_ratio(grid: BandGrid, tolerance: float | None = None) -> float:
    """sup over m != 0 of #{(r, s, w): |E_s(r+m) - E_w(r)| <= tol} / N^d."""
    tol = grid.grouping_tolerance if tolerance is None else tolerance
    d, N = grid.spec.d, grid.N
    E = grid.raw.reshape((N,) * d + (grid.spec.nu,))
    best = 0
    for m in grid_points(d, N)[1:]:
        shifted = np.roll(E, shift=tuple(-int(x) for x in m), axis=tuple(range(d)))
        hits = np.abs(shifted[..., :, None] - E[..., None, :]) <= tol
        best = max(best, int(hits.sum()))
    return best / N ** d


def point_mass_weights(grid: BandGrid, p: int) -> np.ndarray:
    """w_q = N^{-d} sum_r sum_s |P_s(r/N)[v_p, v_q]|^2."""
    nu = grid.spec.nu
    if not 0 <= p < nu:
        raise ValidationError(f"cell vertex {p} out of range")
    w = np.zeros(nu)
    for dc in grid.decomps:
        for k in range(len(dc)):
            w += np.abs(dc.projector(k)[p, :]) ** 2
    return w / len(grid.decomps)


def limit_average_point_mass(grid: BandGrid, p: int, cell_averages) -> float:
    alpha = _cell_averages(grid.spec, cell_averages)
    return float(np.dot(point_mass_weights(grid, p), alpha))


def general_weights(grid: BandGrid, psi0) -> np.ndarray:
    """w_q = sum_r sum_s |[P_s(r/N) (U psi0)_r](v_q)|^2."""
    phi = floquet_transform(grid.spec, grid.N, psi0).reshape(-1, grid.spec.nu)
    w = np.zeros(grid.spec.nu)
    for dc, ph in zip(grid.decomps, phi):
        w += np.sum(np.abs(dc.project(ph)) ** 2, axis=0)
    return w


def limit_average_general(grid: BandGrid, psi0, cell_averages) -> float:
    alpha = _cell_averages(grid.spec, cell_averages)
    return float(np.dot(general_weights(grid, psi0), alpha))


def _cell_averages(spec, cell_averages) -> np.ndarray:
    alpha = np.asarray(cell_averages, dtype=float).reshape(-1)
    if alpha.shape != (spec.nu,):
        raise ValidationError(f"need {spec.nu} cell averages, got {alpha.shape[0]}")
    return alpha


def cell_averages_of(spec: PeriodicGraphSpec, N: int, a) -> np.ndarray:
    """<a(. + v_q)> = N^{-d} sum_k a(v_q + k) for a site array a."""
    a = _as_crystal_state(spec, N, a)
    return a.reshape(-1, spec.nu).mean(axis=0).real


class FlatBand(NamedTuple):
    energy: float
    ranks: np.ndarray  # multiplicity of the level at each grid point


def flat_band_detect(grid: BandGrid, tolerance: float | None = None) -> list:
    """Energies that are eigenvalues of H(r/N) at every grid point."""
    tol = grid.grouping_tolerance if tolerance is None else tolerance
    out = []
    for E in grid.decomps[0].energies:
        ranks = np.array([int(np.sum(np.abs(row - E) <= tol)) for row in grid.raw])
        if np.all(ranks > 0):
            out.append(FlatBand(float(E), ranks))
    return out


class CrosscheckReport(NamedTuple):
    closed_form: float
    numeric: complex
    difference: float
    residual: complex  # m != 0 contribution at finite N
    full_floquet: complex  # closed_form + residual


def finite_n_limit(grid: BandGrid, psi0, a) -> complex:
    """Exact infinite-time average on Gamma_N including the m != 0 terms.

    Pairs (r, s), (r', w) with E_s(r) = E_w(r') contribute
    A_q(r - r') [P_s(r) phi_r](q) conj([P_w(r') phi_r'](q)),
    where A_q(m) = N^{-d} sum_k a(v_q + k) e^{2 pi i m.k/N}.
    """
    spec, N = grid.spec, grid.N
    a = _as_crystal_state(spec, N, a)
    Aq = np.fft.ifftn(a, axes=tuple(range(spec.d)))
    phi = floquet_transform(spec, N, psi0).reshape(-1, spec.nu)
    E, R, U = [], [], []
    for idx, (dc, ph) in enumerate(zip(grid.decomps, phi)):
        proj = dc.project(ph)
        for k in range(len(dc)):
            E.append(dc.energies[k])
            R.append(idx)
            U.append(proj[k])
    E = np.array(E)
    R = np.array(R)
    U = np.array(U)
    order = np.argsort(E, kind="stable")
    total = 0j
    pts = grid.points
    for sl in spectral.cluster_sorted(E[order], grid.grouping_tolerance):
        members = order[sl]
        u = U[members]
        r = pts[R[members]]
        diff = (r[:, None, :] - r[None, :, :]) % N
        A = Aq[tuple(diff[..., i] for i in range(spec.d))]  # (g, g, nu)
        total += np.einsum("xq,yq,xyq->", u, u.conj(), A)
    return complex(total)


def numeric_crosscheck(spec: PeriodicGraphSpec, N: int, psi0, a, T: float | None = None,
                       grouping_tolerance: float | None = None) -> CrosscheckReport:
    """Compare the Floquet closed form with spectral-core on the dense H_N.

    ``T=None`` uses the infinite-time average; otherwise the exact finite-T
    average, which then differs from the closed form by O(1/T) as well.
    """
    psi0 = _as_crystal_state(spec, N, psi0)
    a = _as_crystal_state(spec, N, a)
    grid = band_grid(spec, N, grouping_tolerance)
    closed = limit_average_general(grid, psi0, cell_averages_of(spec, N, a))
    H = dense_hamiltonian(spec, N)
    dec = spectral.eigendecompose(H, grid.grouping_tolerance)
    if T is None:
        num = spectral.infinite_time_average_expectation(dec, psi0.ravel(), a.ravel())
    else:
        num = spectral.time_averaged_expectation(dec, psi0.ravel(), a.ravel(), T)
    full = finite_n_limit(grid, psi0, a)
    return CrosscheckReport(closed, num, abs(num - closed), full - closed, full)
