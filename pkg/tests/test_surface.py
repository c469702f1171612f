import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isoarea.ambient import haar_unitary, make_rng
from isoarea.mobius import complex_band
from isoarea.surface import (
    ParamSurface,
    QuadratureSpec,
    TriMesh,
    apply_motion,
    area,
    derivatives,
    disk_mesh,
    first_fundamental_form,
    flat_chart,
    isotropy_residual,
    mesh_area,
    mesh_isotropy_residual,
    read_mesh_csv,
    scaled,
    triangulate,
    write_mesh_csv,
    write_obj,
)


def clifford_torus():
    # (e^{it}, e^{is}) / sqrt 2, a flat Lagrangian torus of area 2 pi^2
    k = 1 / np.sqrt(2)

    def fmap(t, s):
        t, s = np.broadcast_arrays(t, s)
        return k * np.stack([np.cos(t), np.sin(t), np.cos(s), np.sin(s)], axis=-1)

    return ParamSurface(fmap, (0, 2 * np.pi, 0, 2 * np.pi), 2, "cylinder", name="torus")


def test_flat_chart_area():
    u = np.array([1.0, 0, 0, 0])
    v = np.array([1.0, 2.0, 0, 0])
    assert area(flat_chart(u, v, (0, 3, 0, 1))) == pytest.approx(6.0, abs=1e-12)


def test_clifford_torus_area_and_isotropy():
    T = clifford_torus()
    assert area(T, QuadratureSpec(32, 32), numeric=True) == pytest.approx(2 * np.pi**2, abs=1e-8)
    assert isotropy_residual(T, numeric=True) < 1e-8


def test_domain_and_identification_checks():
    with pytest.raises(ValueError):
        ParamSurface(lambda t, s: np.zeros(np.shape(t) + (4,)), (1, 0, 0, 1), 2)
    with pytest.raises(ValueError):
        ParamSurface(lambda t, s: np.stack([t, s, 0 * t, 0 * s], -1), (0, 1, 0, 1), 2, "cylinder")
    with pytest.raises(ValueError):
        ParamSurface(lambda t, s: np.zeros(np.shape(t) + (4,)), (0, 1, 0, 1), 2, "klein")
    with pytest.raises(ValueError):
        derivatives(complex_band(), 7.0, 0.1)


def test_fd_derivatives_agree_with_analytic(rng):
    band = complex_band()
    t = rng.uniform(0, 2 * np.pi, 50)
    s = rng.uniform(0, np.pi / 2, 50)
    s[:2] = [0.0, np.pi / 2]  # one-sided stencils at the edges
    Ft, Fs = derivatives(band, t, s)
    Nt, Ns = derivatives(band, t, s, numeric=True)
    assert np.max(np.abs(Ft - Nt)) < 1e-6
    assert np.max(np.abs(Fs - Ns)) < 1e-6


def test_quadrature_nodes_weights():
    T, S, W = QuadratureSpec(5, 7).nodes((0, 2, 1, 4))
    assert T.shape == S.shape == W.shape == (5, 7)
    assert W.sum() == pytest.approx(6.0)
    assert np.sum(W * T * S**2) == pytest.approx(2.0 * (64 - 1) / 3, rel=1e-13)
    with pytest.raises(ValueError):
        QuadratureSpec(1, 4)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(0.2, 5.0))
def test_area_scaling_and_unitary_invariance(seed, c):
    band = complex_band()
    base = area(band)
    R = haar_unitary(2, make_rng(seed))
    moved = apply_motion(band, R, shift=np.arange(4.0))
    assert area(moved) == pytest.approx(base, rel=1e-12)
    assert isotropy_residual(moved) < 1e-12
    # areas scale quadratically under dilation
    assert area(scaled(band, c)) == pytest.approx(c * c * base, rel=1e-12)


def test_first_fundamental_form_flat():
    E, F, G = first_fundamental_form(flat_chart(np.eye(4)[0], 3 * np.eye(4)[2]), 0.3, 0.4)
    assert (E, F, G) == (1.0, 0.0, 9.0)


def test_mobius_mesh_topology():
    mesh = triangulate(complex_band(), 16, 4)
    assert mesh.euler_characteristic() == 0
    assert len(mesh.boundary_cycles()) == 1
    assert len(mesh.boundary_cycles()[0]) == 16
    assert not mesh.orientable
    assert not mesh.check_orientable()
    with pytest.raises(ValueError):
        triangulate(complex_band(), 15, 4)


def test_disk_mesh_topology_and_area():
    mesh = disk_mesh(64, 8)
    assert mesh.euler_characteristic() == 1
    assert mesh.check_orientable()
    assert len(mesh.boundary_vertices) == 64
    # inscribed regular 64-gon
    assert mesh_area(mesh) == pytest.approx(32 * np.sin(2 * np.pi / 64), rel=1e-12)
    assert mesh_isotropy_residual(mesh) == pytest.approx(1.0)


def test_cylinder_is_orientable():
    def fmap(t, s):
        t, s = np.broadcast_arrays(t, s)
        return np.stack([np.cos(t), np.sin(t), s, 0 * s], axis=-1)

    cyl = ParamSurface(fmap, (0, 2 * np.pi, 0, 1), 2, "cylinder")
    mesh = triangulate(cyl, 12, 3, diagonals="alternating")
    assert mesh.check_orientable()
    assert mesh.euler_characteristic() == 0
    assert len(mesh.boundary_cycles()) == 2


@pytest.mark.parametrize("diagonals", ["uniform", "alternating"])
def test_band_mesh_area_converges(diagonals):
    exact = area(complex_band())
    errs = [exact - mesh_area(triangulate(complex_band(), 8 * k, 2 * k, diagonals=diagonals)) for k in (4, 8, 16)]
    assert all(e > 0 for e in errs)  # inscribed meshes underestimate
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)


def test_band_mesh_isotropy_residual_first_order():
    # inscribed triangles of a smooth isotropic surface are isotropic only to O(h)
    res = [mesh_isotropy_residual(triangulate(complex_band(), 8 * k, 2 * k)) for k in (4, 8, 16, 32)]
    assert np.all(np.diff(res) < 0)
    rates = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(np.abs(rates - 1.0) < 0.2)


def test_triangulate_rejects_unknown_pattern():
    with pytest.raises(ValueError):
        triangulate(complex_band(), 8, 2, diagonals="checker")


def test_trimesh_validation():
    V = np.array([[0, 0, 0, 0], [1, 0, 0, 0], [2, 0, 0, 0.0]])
    with pytest.raises(ValueError, match="degenerate face 0"):
        TriMesh(V, [[0, 1, 2]])
    with pytest.raises(ValueError):
        TriMesh(V, [[0, 1, 3]])
    with pytest.raises(ValueError):
        TriMesh(V[:, :3], [[0, 1, 2]])


def test_csv_roundtrip_is_lossless(tmp_path, rng):
    mesh = triangulate(complex_band(), 8, 2)
    mesh = mesh.with_vertices(mesh.vertices + 1e-3 * rng.standard_normal(mesh.vertices.shape))
    write_mesh_csv(mesh, tmp_path / "v.csv", tmp_path / "f.csv")
    back = read_mesh_csv(tmp_path / "v.csv", tmp_path / "f.csv", orientable=False)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.faces, mesh.faces)
    header = (tmp_path / "v.csv").read_text().splitlines()[0]
    assert header == "vertex_id,x1,y1,x2,y2"


def test_obj_export(tmp_path):
    mesh = disk_mesh(8, 2)
    write_obj(mesh, tmp_path / "m.obj")
    lines = (tmp_path / "m.obj").read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == len(mesh.vertices)
    faces = [list(map(int, l.split()[1:])) for l in lines if l.startswith("f ")]
    assert np.array_equal(np.array(faces) - 1, mesh.faces)
