import math

import numpy as np
import pytest

import isoarea.optimize as opt
from isoarea.mobius import complex_band
from isoarea.optimize import (
    UPPER_RATIO,
    IsotropicOptProblem,
    LowerBoundViolation,
    OptSchedule,
    circle_boundary,
    estimate_lambda,
    init_mesh,
    isotropic_projection,
    minimize,
    objective_gradient,
    penalized_objective,
    projected_gradient_norm,
)
from isoarea.ambient import make_rng, symplectic_form
from isoarea.surface import TriMesh, disk_mesh, face_areas, mesh_area, mesh_isotropy_residual, triangulate


def random_mesh(rng, res_t=7, res_s=7):
    # 1 + 7 * 7 = 50 vertices, displaced off the complex disk
    mesh = disk_mesh(res_t, res_s)
    V = mesh.vertices + 0.05 * rng.standard_normal(mesh.vertices.shape)
    return mesh.with_vertices(V)


def fd_gradient(mesh, mu, h=1e-6):
    V = mesh.vertices
    G = np.zeros_like(V)
    for i in range(V.shape[0]):
        for k in range(V.shape[1]):
            W = V.copy()
            W[i, k] += h
            fp = penalized_objective(mesh.with_vertices(W), mu)
            W[i, k] -= 2 * h
            fm = penalized_objective(mesh.with_vertices(W), mu)
            G[i, k] = (fp - fm) / (2 * h)
    return G


@pytest.mark.parametrize("mu", [0.0, 1.0, 250.0])
def test_gradient_matches_finite_differences(mu):
    mesh = random_mesh(make_rng(21))
    assert len(mesh.vertices) == 50
    G = objective_gradient(mesh, mu, fixed=[])
    F = fd_gradient(mesh, mu)
    assert np.linalg.norm(G - F) / np.linalg.norm(F) <= 1e-6


def test_gradient_zero_on_fixed_rows():
    mesh = random_mesh(make_rng(22))
    G = objective_gradient(mesh, 3.0)
    assert np.all(G[mesh.boundary_vertices] == 0)
    assert np.any(G[np.setdiff1d(np.arange(50), mesh.boundary_vertices)] != 0)


def closed_mesh(rng):
    # boundary of a 3-simplex with random vertices in R^4
    V = rng.standard_normal((4, 4))
    return TriMesh(V, [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])


def test_translation_invariance_on_closed_mesh():
    mesh = closed_mesh(make_rng(23))
    assert len(mesh.boundary_edges) == 0
    for mu in (0.0, 5.0):
        G = objective_gradient(mesh, mu, fixed=[])
        assert np.max(np.abs(G.sum(axis=0))) <= 1e-10


def test_degenerate_face_error():
    V = np.array([[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [2, 0, 0, 0.0]])
    mesh = TriMesh(V, [[0, 1, 2], [1, 3, 2]])
    W = V.copy()
    W[2] = [0.5, 0, 0, 0]  # face 0 becomes a segment
    with pytest.raises(FloatingPointError, match="degenerate face 0"):
        opt._value_and_grad(W, mesh.faces, 1.0)


def test_penalized_objective_properties():
    D = disk_mesh(64, 4)
    assert penalized_objective(D, 0.0) == pytest.approx(mesh_area(D))
    assert penalized_objective(D, 0.0) == pytest.approx(math.pi, rel=2e-3)
    a, b = D.vertices[D.faces[:, 1]] - D.vertices[D.faces[:, 0]], D.vertices[D.faces[:, 2]] - D.vertices[D.faces[:, 0]]
    penalty = np.sum((0.5 * symplectic_form(a, b)) ** 2)
    assert penalized_objective(D, 2.0) - penalized_objective(D, 1.0) == pytest.approx(penalty, rel=1e-12)
    band = isotropic_projection(init_mesh(IsotropicOptProblem.circle(16, resolution=4)), tol=1e-13)
    assert penalized_objective(band, 1e6) == pytest.approx(mesh_area(band), abs=1e-12)


def test_init_mesh_mobius():
    prob = IsotropicOptProblem.circle(64, resolution=16)
    mesh = init_mesh(prob)
    b = mesh.vertices[mesh.boundary_vertices]
    assert np.max(np.abs(np.linalg.norm(b, axis=1) - 1)) <= 1e-12
    assert np.max(np.abs(b[:, 2:])) <= 1e-12
    assert mesh_area(mesh) / math.pi == pytest.approx(UPPER_RATIO, abs=2e-2)
    assert mesh_area(mesh) < mesh_area(triangulate(complex_band(), 128, 32))
    assert mesh.euler_characteristic() == 0


def test_init_mesh_residual_is_first_order():
    # the inscribed band mesh is isotropic only to O(h)
    res = [mesh_isotropy_residual(init_mesh(IsotropicOptProblem.circle(32 * k, resolution=8 * k))) for k in (1, 2, 4)]
    assert res[0] / res[1] == pytest.approx(2.0, rel=0.15)
    assert res[1] / res[2] == pytest.approx(2.0, rel=0.15)


def test_init_mesh_disk():
    mesh = init_mesh(IsotropicOptProblem.circle(32, topology="disk", resolution=6))
    assert mesh.euler_characteristic() == 1
    assert mesh_isotropy_residual(mesh) == pytest.approx(1.0, abs=0.05)


def test_init_mesh_noncomplex_plane():
    prob = IsotropicOptProblem.circle(32, plane_a=0.5, resolution=8)
    mesh = init_mesh(prob)
    np.testing.assert_array_equal(mesh.vertices[opt._boundary_order(mesh, prob.boundary)], prob.boundary)


def test_unsupported_boundaries():
    ellipse = circle_boundary(32) * np.array([1.0, 2.0, 1.0, 1.0])
    with pytest.raises(NotImplementedError):
        init_mesh(IsotropicOptProblem(ellipse, resolution=4))
    uneven = circle_boundary(32)[np.r_[0:10, 11:32]]
    with pytest.raises(NotImplementedError):
        init_mesh(IsotropicOptProblem(uneven, resolution=4))
    with pytest.raises(ValueError):
        init_mesh(IsotropicOptProblem(circle_boundary(31), resolution=4))


def test_problem_and_schedule_validation():
    with pytest.raises(ValueError):
        IsotropicOptProblem(circle_boundary(8), topology="torus")
    with pytest.raises(ValueError):
        IsotropicOptProblem(circle_boundary(8), penalty_weight=0)
    with pytest.raises(ValueError):
        OptSchedule(mu_growth=1.0)
    with pytest.raises(ValueError):
        OptSchedule(inner_steps=0)
    with pytest.raises(ValueError):
        OptSchedule(method="newton")
    with pytest.raises(ValueError):
        OptSchedule(smoothing=-1)


def test_projection_reaches_tolerance_and_fixes_boundary():
    prob = IsotropicOptProblem.circle(32, resolution=8)
    mesh = init_mesh(prob)
    proj = isotropic_projection(mesh, tol=1e-12)
    assert mesh_isotropy_residual(proj) <= 1e-12
    bv = mesh.boundary_vertices
    np.testing.assert_array_equal(proj.vertices[bv], mesh.vertices[bv])
    # projection moves vertices by O(h^2) only
    assert np.max(np.abs(proj.vertices - mesh.vertices)) < 0.05


@pytest.fixture(scope="module")
def small_run():
    prob = IsotropicOptProblem.circle(32, resolution=8)
    return prob, minimize(prob, seed=0)


def test_minimize_small_mobius(small_run):
    prob, rep = small_run
    assert rep.converged
    assert rep.stationary
    assert rep.isotropy_residual <= 1e-4
    assert 3 * 0.98 <= rep.area_ratio
    # coarse meshes sit above the smooth band value by their discretisation error
    assert rep.area_ratio < mesh_area(init_mesh(prob)) / math.pi + 0.1
    assert rep.lower_bound == pytest.approx(3 * math.pi)
    assert rep.projected_grad_norm < 1e-2
    np.testing.assert_array_equal(rep.mesh.vertices[rep.mesh.boundary_vertices],
                                  init_mesh(prob).vertices[rep.mesh.boundary_vertices])
    assert face_areas(rep.mesh.vertices, rep.mesh.faces).min() >= opt.EPS_FACE


def test_trace_monotone_within_stages(small_run):
    _, rep = small_run
    stages: dict = {}
    for row in rep.trace:
        stages.setdefault(row["stage"], []).append(row["objective"])
    assert len(stages) >= 2
    for values in stages.values():
        assert np.all(np.diff(values) <= 0)


def test_seed_determinism(small_run):
    prob, rep = small_run
    again = minimize(prob, seed=0)
    assert again.to_record() == rep.to_record()


def test_scaling(small_run):
    prob, rep = small_run
    big = minimize(IsotropicOptProblem.circle(32, radius=2.0, resolution=8), seed=0)
    assert big.area == pytest.approx(4 * rep.area, rel=1e-2)
    assert big.area_ratio == pytest.approx(rep.area_ratio, rel=1e-6)


def test_noncomplex_plane_below_band_value():
    rep = minimize(IsotropicOptProblem.circle(32, plane_a=0.5, resolution=8), seed=0)
    assert rep.converged
    assert rep.lower_bound is None
    assert rep.area_ratio < UPPER_RATIO - 0.5


def test_disk_topology_cannot_be_isotropic():
    # an orientable isotropic disk would have zero symplectic area, but the
    # complex unit circle encloses symplectic area pi
    rep = minimize(IsotropicOptProblem.circle(16, topology="disk", resolution=4),
                   OptSchedule(outer_iterations=3, inner_steps=200), seed=0)
    assert not rep.converged
    assert rep.message != "stationary"


def test_budget_exhaustion_is_reported():
    rep = minimize(IsotropicOptProblem.circle(32, resolution=8), OptSchedule(outer_iterations=1, inner_steps=5))
    assert not rep.converged
    assert rep.message.startswith("budget exhausted")


def test_lower_bound_assertion(monkeypatch, small_run):
    prob, _ = small_run
    monkeypatch.setattr(opt, "_lower_bound", lambda *a: 100.0)
    with pytest.raises(LowerBoundViolation):
        minimize(prob, seed=0)


def test_projected_gradient_small_after_run(small_run):
    _, rep = small_run
    init = init_mesh(IsotropicOptProblem.circle(32, resolution=8))
    assert rep.projected_grad_norm < projected_gradient_norm(isotropic_projection(init, tol=1e-12))


def test_estimate_lambda_bracket():
    out = estimate_lambda(resolutions=((16, 4), (32, 8)))
    lo, hi = out["bracket"]
    assert lo == 3.0
    assert hi == pytest.approx(UPPER_RATIO)
    r1, r2 = (row["area_ratio"] for row in out["rows"])
    assert r2 < r1
    assert out["richardson"] == pytest.approx((4 * r2 - r1) / 3)
    assert abs(out["richardson"] - UPPER_RATIO) < abs(r2 - UPPER_RATIO)
