import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from allmach.errors import ConfigurationError
from allmach.mesh import build_uniform_mesh


def test_1d_unit_interval_four_cells():
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    assert mesh.cell_volume == 0.25
    assert mesh.n_faces == (4,)
    assert mesh.dual_volume == (0.25,)


def test_2d_two_by_two():
    mesh = build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (2, 2))
    assert mesh.n_cells == 4
    assert mesh.cell_volume == 0.25
    assert mesh.face_area[0] == 0.5  # x-face measure = dy


def test_2d_stratified_channel_cell_volume():
    mesh = build_uniform_mesh(((-1.0, 1.0), (0.0, 0.4)), (800, 160))
    assert mesh.cell_volume == pytest.approx(6.25e-6, rel=1e-12)


def test_perimeter_ratio_1d():
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    assert mesh.perimeter_ratio(0) == pytest.approx(8.0)


def test_perimeter_ratio_2d_square_cell():
    mesh = build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (10, 10))
    assert mesh.perimeter_ratio(3) == pytest.approx(40.0)


def test_perimeter_ratio_2d_channel_cell():
    # independent arithmetic oracle: 2 (dx + dy) / (dx dy)
    dx, dy = 2.0 / 800, 0.4 / 160
    expected = 2.0 * (dx + dy) / (dx * dy)
    mesh = build_uniform_mesh(((-1.0, 1.0), (0.0, 0.4)), (800, 160))
    assert mesh.perimeter_ratio() == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(1600.0, rel=1e-13)


def test_invalid_configurations():
    with pytest.raises(ConfigurationError):
        build_uniform_mesh(((0.0, 1.0),), (1,))
    with pytest.raises(ConfigurationError):
        build_uniform_mesh(((1.0, 1.0),), (4,))
    with pytest.raises(ConfigurationError):
        build_uniform_mesh(((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (4, 4, 4))


@settings(max_examples=30, deadline=None)
@given(nx=st.integers(2, 64), ny=st.integers(2, 64))
def test_volume_identities_2d(nx, ny):
    mesh = build_uniform_mesh(((0.0, 2.0), (-1.0, 0.5)), (nx, ny))
    omega = mesh.domain_volume
    assert abs(mesh.n_cells * mesh.cell_volume - omega) <= 1e-12 * omega
    for d in range(2):
        assert abs(mesh.n_faces[d] * mesh.dual_volume[d] - omega) <= 1e-12 * omega
        # |D| = (|K| + |L|)/2 on the uniform grid
        assert mesh.dual_volume[d] == pytest.approx(mesh.cell_volume)


@settings(max_examples=20, deadline=None)
@given(nx=st.integers(2, 64))
def test_adjacency_involution_1d(nx):
    mesh = build_uniform_mesh(((0.0, 1.0),), (nx,))
    idx = np.arange(mesh.n_cells)
    # crossing a face and crossing back returns to the start
    assert np.array_equal(mesh.shift_minus[0][mesh.shift_plus[0]], idx)
    assert np.array_equal(mesh.shift_plus[0][mesh.shift_minus[0]], idx)


def test_owner_neighbor_orientation(mesh2d):
    # every face has exactly two owners, normal pointing owner -> neighbor
    for d in range(2):
        assert np.array_equal(mesh2d.face_owner[d], np.arange(mesh2d.n_cells))
        assert not np.any(mesh2d.face_owner[d] == mesh2d.face_neighbor[d])


def test_face_centers_land_on_lattice():
    mesh = build_uniform_mesh(((0.0, 1.0),), (100,))
    (xf,) = mesh.face_centers(0)
    assert xf[49] == 0.5  # exact: 50/100
    assert xf[-1] == 1.0
