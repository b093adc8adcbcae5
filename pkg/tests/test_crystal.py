import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from equiwalk import crystal, lattice, spectral
from equiwalk.errors import ValidationError


@pytest.mark.parametrize("name", crystal.SHIPPED_GRAPHS)
def test_shipped_graphs_load_and_roundtrip(name):
    spec = crystal.load_graph(name)
    again = crystal.PeriodicGraphSpec.from_dict(spec.to_dict())
    assert again.edges == spec.edges and again.potential == spec.potential


@pytest.mark.parametrize("name", crystal.SHIPPED_GRAPHS)
def test_floquet_matrices_hermitian(name):
    spec = crystal.load_graph(name)
    rng = np.random.default_rng(0)
    H = crystal.build_floquet_matrix(spec, rng.uniform(size=spec.d))
    np.testing.assert_allclose(H, H.conj().T, atol=1e-14)


@pytest.mark.parametrize("name", crystal.SHIPPED_GRAPHS)
def test_floquet_blocks_reproduce_dense_spectrum(name):
    spec = crystal.load_graph(name)
    N = 6 if spec.d == 1 else 4
    dense = np.linalg.eigvalsh(crystal.dense_hamiltonian(spec, N))
    grid = crystal.band_grid(spec, N)
    np.testing.assert_allclose(np.sort(grid.raw.ravel()), dense, atol=1e-11)


def test_asymmetric_edges_rejected_or_closed():
    obj = {"d": 1, "nu": 1, "edges": [[0, 0, [1]]]}
    with pytest.raises(ValidationError):
        crystal.PeriodicGraphSpec.from_dict(obj, symmetrize=False)
    with pytest.warns(UserWarning):
        spec = crystal.PeriodicGraphSpec.from_dict(obj)
    assert (0, 0, (-1,)) in spec.edges


def test_offset_limit_and_bad_vertex():
    with pytest.raises(ValidationError):
        crystal.PeriodicGraphSpec(1, 1, ((0, 0, (9,)), (0, 0, (-9,))), (0.0,))
    with pytest.raises(ValidationError):
        crystal.PeriodicGraphSpec(1, 1, ((0, 1, (0,)), (1, 0, (0,))), (0.0,))


def test_disconnected_quotient_warns():
    with pytest.warns(UserWarning):
        crystal.PeriodicGraphSpec(1, 2, ((0, 0, (1,)), (0, 0, (-1,))), (0.0, 0.0))


def test_floquet_transform_unitary():
    spec = crystal.load_graph("honeycomb")
    rng = np.random.default_rng(1)
    psi = rng.normal(size=crystal.state_shape(spec, 5))
    phi = crystal.floquet_transform(spec, 5, psi)
    assert abs(np.linalg.norm(phi) - np.linalg.norm(psi)) < 1e-12
    np.testing.assert_allclose(crystal.inverse_floquet_transform(spec, 5, phi), psi, atol=1e-12)


def test_z1_matches_lattice_module():
    spec = crystal.zd(1)
    N = 9
    s = np.random.default_rng(3).uniform(size=N)
    T = lattice.LatticeTorus(1, N)
    ref = lattice.exact_time_average_limit(T, (0,), lattice.LatticeObservable.from_samples(T, s))
    rep = crystal.numeric_crosscheck(spec, N, crystal.point_mass_state(spec, N, 0), s[:, None])
    assert abs(rep.full_floquet - ref) < 1e-12
    assert abs(rep.numeric - ref) < 1e-12


@pytest.mark.parametrize("name", ["strip3", "cylinder4", "ladder", "honeycomb", "flatband", "triangular"])
def test_full_floquet_limit_equals_dense(name):
    spec = crystal.load_graph(name)
    N = 5 if spec.d == 1 else 4
    rng = np.random.default_rng(4)
    a = rng.uniform(-1, 1, crystal.state_shape(spec, N))
    psi = rng.normal(size=crystal.state_shape(spec, N)) + 0j
    psi /= np.linalg.norm(psi)
    rep = crystal.numeric_crosscheck(spec, N, psi, a)
    assert abs(rep.full_floquet - rep.numeric) < 1e-10


@given(st.sampled_from(["strip3", "cylinder4", "ladder", "honeycomb"]), st.integers(4, 10))
def test_point_mass_weights_normalized(name, N):
    spec = crystal.load_graph(name)
    grid = crystal.band_grid(spec, N)
    for p in range(spec.nu):
        w = crystal.point_mass_weights(grid, p)
        assert abs(w.sum() - 1) < 1e-12 and np.all(w >= 0)


def test_strip_weights_at_several_N():
    # the closed form does not depend on N once N is large enough to see every band pair
    spec = crystal.load_graph("strip3")
    for N in (4, 8, 12):
        w = crystal.point_mass_weights(crystal.band_grid(spec, N), 0)
        np.testing.assert_allclose(w, [3 / 8, 1 / 4, 3 / 8], atol=1e-12)


def test_flat_band_detection():
    grid = crystal.band_grid(crystal.load_graph("flatband"), 8)
    flats = crystal.flat_band_detect(grid)
    assert [round(f.energy, 12) for f in flats] == [0.0]
    assert len(crystal.flat_band_detect(crystal.band_grid(crystal.load_graph("strip3"), 8))) == 0


def test_floquet_ratio_zd_decays():
    r = [crystal.floquet_condition_ratio(crystal.band_grid(crystal.zd(1), N)) for N in (8, 16, 32)]
    np.testing.assert_allclose(r, [0.25, 0.125, 0.0625])


def test_band_grid_csv(tmp_path):
    grid = crystal.band_grid(crystal.load_graph("ladder"), 4)
    path = tmp_path / "bands.csv"
    grid.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r1,band_index,energy,degeneracy"
    assert len(lines) - 1 == sum(len(dc) for dc in grid.decomps)


def test_bad_cell_averages():
    grid = crystal.band_grid(crystal.load_graph("strip3"), 4)
    with pytest.raises(ValidationError):
        crystal.limit_average_point_mass(grid, 0, [1.0, 2.0])
