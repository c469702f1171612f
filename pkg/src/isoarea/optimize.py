"""Area minimisation over discrete isotropic surfaces with a fixed boundary.

The discrete isotropy constraint is one equation per face: its symplectic
area ``c_f = omega(e1, e2) / 2`` must vanish.  :func:`minimize` enforces it
with a quadratic penalty ``mu * sum c_f^2`` under continuation in ``mu``.
Between stages the penalty centre is shifted by the current violation
(the multiplier update of an augmented Lagrangian), which lets the
constraints converge without driving ``mu`` to infinity.  The run finishes
with a damped Gauss-Newton projection onto the exact constraint set.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .ambient import TwoPlane, apply_complex_structure, canonical_plane, symplectic_form
from .mobius import BAND_UPPER_AREA, circle_band
from .surface import ParamSurface, TriMesh, face_areas, mesh_area, mesh_isotropy_residual, triangulate

logger = logging.getLogger(__name__)

__all__ = [
    "EPS_FACE",
    "UPPER_RATIO",
    "IsotropicOptProblem",
    "LowerBoundViolation",
    "OptReport",
    "OptSchedule",
    "circle_boundary",
    "estimate_lambda",
    "init_mesh",
    "isotropic_projection",
    "minimize",
    "objective_gradient",
    "penalized_objective",
    "projected_gradient_norm",
]

#: smallest face area a line-search step may create
EPS_FACE = 1e-9
#: area / (pi r^2) of the complex band
UPPER_RATIO = BAND_UPPER_AREA / math.pi
#: relative slack on the proved lower bound for mesh error
LOWER_ALLOWANCE = 0.02


class LowerBoundViolation(AssertionError):
    """A converged run reported an area below the proved lower bound."""


def circle_boundary(m: int = 128, radius: float = 1.0, plane: Optional[TwoPlane] = None, center=None,
                    n: int = 2) -> np.ndarray:
    """``m`` equally spaced points on a circle, by default the unit circle of ``C x {0}``."""
    if plane is None:
        I = np.eye(2 * n)
        plane = TwoPlane(I[0], I[1])
    c = np.zeros(2 * plane.n) if center is None else np.asarray(center, dtype=float)
    t = 2 * np.pi * np.arange(m) / m
    return c + radius * (np.outer(np.cos(t), plane.e1) + np.outer(np.sin(t), plane.e2))


@dataclass
class IsotropicOptProblem:
    """Boundary cycle (kept fixed), topology of the competitor and its resolution.

    ``resolution`` is the number of cell rows between the boundary and the
    core (mobius) or centre (disk); the length of the boundary cycle sets the
    other direction; ``diagonals`` is passed to
    :func:`~isoarea.surface.triangulate`.  ``penalty_weight`` is dimensionless: the penalty
    coefficient of the first stage is ``penalty_weight * faces / enclosed area``,
    so the balance between area and penalty does not drift with resolution.
    """

    boundary: np.ndarray
    topology: str = "mobius"
    penalty_weight: float = 100.0
    resolution: int = 32
    diagonals: str = "alternating"

    def __post_init__(self):
        self.boundary = np.asarray(self.boundary, dtype=float)
        if self.topology not in ("mobius", "disk"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if not self.penalty_weight > 0:
            raise ValueError("penalty weight must be positive")
        if self.boundary.ndim != 2 or self.boundary.shape[1] % 2 or len(self.boundary) < 4:
            raise ValueError("boundary must be an (m, 2n) cycle with m >= 4")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")

    @property
    def n(self) -> int:
        return self.boundary.shape[1] // 2

    @classmethod
    def circle(cls, m: int = 128, radius: float = 1.0, plane_a: Optional[float] = None, n: int = 2,
               **kw) -> "IsotropicOptProblem":
        """Circle problem; ``plane_a=None`` (or 1) is the complex line ``C x {0}``."""
        plane = None if plane_a is None or plane_a == 1 else canonical_plane(plane_a, n)[0]
        return cls(circle_boundary(m, radius, plane, n=n), **kw)


@dataclass
class OptSchedule:
    """Continuation schedule.

    ``mu`` grows by ``mu_growth`` after a stage that failed to cut the
    constraint violation by ``shrink``; with ``multipliers=False`` it grows
    after every stage (plain penalty continuation).  A stage is stationary
    when the max-norm of its gradient, relative to the value at the start of
    the run, is at most ``grad_tol``, or when it changed the area by at most
    ``ftol`` relative.  ``smoothing`` sets the face-area regularisation
    ``eta`` as a fraction of the initial mean face area.
    """

    outer_iterations: int = 20
    mu_growth: float = 4.0
    inner_steps: int = 3000
    grad_tol: float = 1e-5
    ftol: float = 1e-7
    residual_target: float = 1e-4
    method: str = "lbfgs"
    history: int = 10
    multipliers: bool = True
    shrink: float = 1.0
    polish: bool = True
    smoothing: float = 1e-3

    def __post_init__(self):
        if not self.mu_growth > 1:
            raise ValueError("mu_growth must exceed 1")
        if self.outer_iterations < 1 or self.inner_steps < 1:
            raise ValueError("iteration budgets must be positive")
        if self.method not in ("lbfgs", "gd"):
            raise ValueError(f"unknown inner method {self.method!r}")
        if not 0 < self.shrink <= 1:
            raise ValueError("shrink must lie in (0, 1]")
        if self.smoothing < 0:
            raise ValueError("smoothing must be non-negative")


@dataclass
class OptReport:
    area: float
    isotropy_residual: float
    area_ratio: float
    converged: bool
    boundary_area: float
    seed: Optional[int]
    resolution: tuple
    topology: str
    final_mu: float
    grad_norm: float
    projected_grad_norm: float
    lower_bound: Optional[float]
    iterations: int
    stationary: bool
    message: str
    trace: list = field(default_factory=list)
    mesh: Optional[TriMesh] = field(default=None, repr=False)

    def to_record(self) -> dict:
        d = asdict(self)
        d.pop("mesh")
        d["resolution"] = list(self.resolution)
        return d


# ---------------------------------------------------------------- boundary geometry


def _fit_circle(boundary: np.ndarray, tol: float = 1e-9):
    """Centre, in-plane frame and radius of an equally spaced planar circle."""
    c = boundary.mean(axis=0)
    r = boundary - c
    radii = np.linalg.norm(r, axis=1)
    R = radii.mean()
    if np.max(np.abs(radii - R)) > tol * R:
        raise NotImplementedError("only circular boundaries are supported")
    _, sv, vt = np.linalg.svd(r, full_matrices=False)
    if len(sv) > 2 and sv[2] > tol * sv[0]:
        raise NotImplementedError("only planar boundaries are supported")
    e1 = r[0] / R
    w = r[1] - (r[1] @ e1) * e1
    e2 = w / np.linalg.norm(w)
    m = len(boundary)
    t = 2 * np.pi * np.arange(m) / m
    model = c + R * (np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2))
    if np.max(np.abs(model - boundary)) > tol * max(R, 1.0):
        raise NotImplementedError("boundary points must be equally spaced around the circle")
    return c, e1, e2, R


def _partner(e1, e2):
    """omega-orthogonal plane ``span(f1, f2)`` with ``omega(f1, f2) = omega(e1, e2)``.

    Works inside the complex span of ``(e1, e2)`` when that is ``C^2``; for a
    complex line the partner is any orthogonal complex line.
    """
    target = symplectic_form(e1, e2)
    W = np.stack([e1, e2, apply_complex_structure(e1), apply_complex_structure(e2)])
    u, sv, vt = np.linalg.svd(W)
    rank = int(np.sum(sv > 1e-9 * sv[0]))
    if rank == 2:
        if e1.shape[0] < 4:
            raise ValueError("need n >= 2")
        g = vt[2]  # orthogonal to the complex line, and so is J g
        f1, f2 = g, apply_complex_structure(g)
    else:
        basis = vt[:4]
        # omega(v, e) = -(J e) . v; kernel restricted to the complex span
        A = np.stack([apply_complex_structure(e1), apply_complex_structure(e2)]) @ basis.T
        ker = np.linalg.svd(A)[2][2:]
        f1, f2 = ker @ basis
    if symplectic_form(f1, f2) * target < 0:
        f2 = -f2
    if abs(symplectic_form(f1, f2) - target) > 1e-9:
        raise RuntimeError("omega-orthogonal partner has the wrong Kahler cosine")
    return f1, f2


def _warm_band(boundary: np.ndarray) -> ParamSurface:
    c, e1, e2, R = _fit_circle(boundary)
    f1, f2 = _partner(e1, e2)
    return circle_band(e1, e2, f1, f2, radius=R, center=c, name="warm_band")


def init_mesh(problem: IsotropicOptProblem, res: Optional[int] = None, rng=None) -> TriMesh:
    """Starting mesh whose boundary vertices are exactly ``problem.boundary``.

    Mobius topology triangulates the isotropic band over the boundary circle;
    disk topology is the flat cone over the boundary with interior vertices
    displaced by uniform noise of size 1e-3.
    """
    res = problem.resolution if res is None else res
    b = problem.boundary
    m = len(b)
    c, e1, e2, R = _fit_circle(b)
    if problem.topology == "mobius":
        if m % 2:
            raise ValueError("mobius meshes need an even number of boundary points")
        mesh = triangulate(_warm_band(b), m, res, diagonals=problem.diagonals)
    else:
        def cone(t, s):
            t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
            rr = R * (1.0 - s)
            return c + np.multiply.outer(rr * np.cos(t), e1) + np.multiply.outer(rr * np.sin(t), e2)

        mesh = triangulate(ParamSurface(cone, (0.0, 2 * np.pi, 0.0, 1.0), problem.n, "cylinder"), m, res,
                           diagonals=problem.diagonals)
        if rng is None:
            rng = np.random.default_rng(0)
        V = mesh.vertices.copy()
        interior = np.setdiff1d(np.arange(len(V)), mesh.boundary_vertices)
        V[interior] += 1e-3 * R * rng.uniform(-1, 1, (len(interior), V.shape[1]))
        mesh = mesh.with_vertices(V)
    # boundary rows of the grid come first, in boundary order
    V = mesh.vertices.copy()
    bv = _boundary_order(mesh, b)
    gap = np.max(np.abs(V[bv] - b))
    if gap > 1e-9 * max(R, 1.0):
        raise RuntimeError(f"initial mesh boundary misses the prescribed cycle by {gap:.3e}")
    V[bv] = b
    return TriMesh(V, mesh.faces, mesh.orientable, EPS_FACE)


def _boundary_order(mesh: TriMesh, boundary: np.ndarray) -> np.ndarray:
    bv = mesh.boundary_vertices
    d = np.linalg.norm(mesh.vertices[bv][:, None, :] - boundary[None], axis=-1)
    return bv[np.argmin(d, axis=0)]


# ---------------------------------------------------------------- objective


def _edges(V, f):
    v0 = V[f[:, 0]]
    return V[f[:, 1]] - v0, V[f[:, 2]] - v0


def penalized_objective(mesh: TriMesh, mu: float) -> float:
    """``area + mu * sum_f (omega(e1, e2) / 2)^2``."""
    a, b = _edges(mesh.vertices, mesh.faces)
    c = 0.5 * symplectic_form(a, b)
    return mesh_area(mesh) + mu * float(np.sum(c * c))


def _scatter(nv, f, ga, gb):
    # edge gradients back to vertices: a = v1 - v0, b = v2 - v0
    G = np.empty((nv, ga.shape[1]))
    for k in range(ga.shape[1]):
        G[:, k] = (np.bincount(f[:, 1], ga[:, k], nv) + np.bincount(f[:, 2], gb[:, k], nv)
                   - np.bincount(f[:, 0], ga[:, k] + gb[:, k], nv))
    return G


def _value_and_grad(V: np.ndarray, f: np.ndarray, mu: float, shift=None, eta: float = 0.0):
    """Value and vertex gradient of ``area + mu * sum (c_f + shift_f)^2``, plus face areas.

    With ``eta > 0`` each face area ``A`` is replaced by ``sqrt(A^2 + eta^2)``,
    which removes the kink of the area functional at collapsing faces.  The
    returned face areas are the true ones.
    """
    a, b = _edges(V, f)
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    ab = np.einsum("ij,ij->i", a, b)
    A = 0.5 * np.sqrt(np.maximum(aa * bb - ab * ab, 0.0))
    As = np.sqrt(A * A + eta * eta) if eta > 0 else A
    bad = np.flatnonzero(As <= 0.0)
    if bad.size:
        raise FloatingPointError(f"degenerate face {int(bad[0])}: vertices {f[bad[0]].tolist()}")
    Ja, Jb = apply_complex_structure(a), apply_complex_structure(b)
    c = 0.5 * np.einsum("ij,ij->i", Ja, b)
    r = c if shift is None else c + shift
    value = float(As.sum() + mu * (r @ r))
    inv = 1.0 / (4.0 * As)
    w = (mu * r)[:, None]  # d/d(omega) of mu r^2 is mu r
    ga = (bb * inv)[:, None] * a - (ab * inv)[:, None] * b - w * Jb
    gb = (aa * inv)[:, None] * b - (ab * inv)[:, None] * a + w * Ja
    return value, _scatter(len(V), f, ga, gb), A


def objective_gradient(mesh: TriMesh, mu: float, fixed=None) -> np.ndarray:
    """Analytic gradient of :func:`penalized_objective`, one row per vertex.

    Rows of ``fixed`` vertices (the boundary by default) are zero.  Raises
    ``FloatingPointError`` naming the first degenerate face.
    """
    _, G, _ = _value_and_grad(mesh.vertices, mesh.faces, mu)
    fixed = mesh.boundary_vertices if fixed is None else np.asarray(fixed, dtype=np.int64)
    G[fixed] = 0.0
    return G


# ---------------------------------------------------------------- constraint projection


def _free_index(nv, fixed):
    free = np.setdiff1d(np.arange(nv), fixed)
    idx = -np.ones(nv, dtype=np.int64)
    idx[free] = np.arange(len(free))
    return free, idx


def _constraint_jacobian(V, f, free_index, dim):
    """Sparse jacobian of ``omega_f`` with respect to the free coordinates."""
    a, b = _edges(V, f)
    Ja, Jb = apply_complex_structure(a), apply_complex_structure(b)
    corner = (Jb - Ja, -Jb, Ja)  # d omega / d v0, v1, v2
    rows, cols, vals = [], [], []
    nf = len(f)
    for k in range(3):
        idx = free_index[f[:, k]]
        ok = idx >= 0
        rows.append(np.repeat(np.flatnonzero(ok), dim))
        cols.append((idx[ok][:, None] * dim + np.arange(dim)).ravel())
        vals.append(corner[k][ok].ravel())
    nfree = int(free_index.max()) + 1
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(nf, nfree * dim))


def _symplectic_cosines(V, f):
    a, b = _edges(V, f)
    om = symplectic_form(a, b)
    return om, np.abs(om) / (2.0 * face_areas(V, f))


def isotropic_projection(mesh: TriMesh, fixed=None, tol: float = 1e-12, max_iter: int = 200) -> TriMesh:
    """Move the free vertices onto the discrete isotropy constraints.

    Damped Gauss-Newton (Levenberg-Marquardt): each step solves
    ``(J J^T + lam I) y = omega`` and moves by ``-J^T y``, so for small
    ``lam`` it is the minimum-norm correction of the linearised constraints.
    ``lam`` shrinks after steps that reduce ``|omega|`` and grows otherwise.
    Stops when every face has symplectic cosine at most ``tol``; raises
    ``RuntimeError`` if that is not reached in ``max_iter`` steps.
    """
    fixed = mesh.boundary_vertices if fixed is None else np.asarray(fixed, dtype=np.int64)
    V = mesh.vertices.copy()
    f = mesh.faces
    dim = V.shape[1]
    free, idx = _free_index(len(V), fixed)
    if not len(free):
        raise ValueError("no free vertices to move")
    om, cos = _symplectic_cosines(V, f)
    err = float(np.linalg.norm(om))
    lam = None
    for it in range(max_iter):
        if cos.max() <= tol:
            return TriMesh(V, f, mesh.orientable, mesh.min_face_area)
        Jc = _constraint_jacobian(V, f, idx, dim)
        M = (Jc @ Jc.T).tocsc()
        scale = float(M.diagonal().mean())
        lam = 1e-2 * scale if lam is None else lam
        eye = sp.identity(M.shape[0], format="csc")
        while True:
            y = spla.splu(M + lam * eye).solve(om)
            W = V.copy()
            W[free] -= (Jc.T @ y).reshape(-1, dim)
            A = face_areas(W, f)
            if A.min() > 0:
                om_new, cos_new = _symplectic_cosines(W, f)
                err_new = float(np.linalg.norm(om_new))
                if err_new < err:
                    break
            lam *= 4.0
            if lam > 1e12 * scale:
                raise RuntimeError(f"isotropic projection cannot reduce the residual ({cos.max():.3e})")
        V, om, cos, err = W, om_new, cos_new, err_new
        lam = max(lam / 3.0, 1e-14 * scale)
        logger.debug("projection step %d: residual %.3e", it, cos.max())
    if cos.max() > tol:
        raise RuntimeError(f"isotropic projection stalled at residual {cos.max():.3e}")
    return TriMesh(V, f, mesh.orientable, mesh.min_face_area)


def projected_gradient_norm(mesh: TriMesh, fixed=None) -> float:
    """Max-norm of the area gradient minus its least-squares constraint component.

    Vanishes at constrained critical points (first-order KKT condition).
    """
    fixed = mesh.boundary_vertices if fixed is None else np.asarray(fixed, dtype=np.int64)
    V, f = mesh.vertices, mesh.faces
    free, idx = _free_index(len(V), fixed)
    _, G, _ = _value_and_grad(V, f, 0.0)
    g = G[free].ravel()
    Jc = _constraint_jacobian(V, f, idx, V.shape[1])
    M = (Jc @ Jc.T).tocsc()
    M = M + sp.identity(M.shape[0], format="csc") * (1e-12 * M.diagonal().mean())
    lam = spla.splu(M).solve(Jc @ g)
    return float(np.max(np.abs(g - Jc.T @ lam)))


# ---------------------------------------------------------------- inner solver


def _descent(fun, x, fx, gx, max_steps, gtol, method, history, trace, stage, mu):
    """L-BFGS (or steepest-descent) directions with Armijo backtracking.

    ``fun(x)`` returns ``(value, grad)``, or ``None`` for rejected points
    (degenerate or too-small faces).  Returns the final point, value,
    gradient, number of accepted steps and whether the line search failed.
    """
    s_hist: deque = deque(maxlen=history)
    y_hist: deque = deque(maxlen=history)
    step0 = 1.0
    last_len = 1.0
    steps = 0
    stuck = False
    while steps < max_steps:
        if float(np.max(np.abs(gx))) <= gtol:
            break
        if method == "lbfgs" and s_hist:
            # two-loop recursion
            q = gx.copy()
            saved = []
            for s, y in zip(reversed(s_hist), reversed(y_hist)):
                rho = 1.0 / (y @ s)
                al = rho * (s @ q)
                saved.append((rho, al, s, y))
                q -= al * y
            s, y = s_hist[-1], y_hist[-1]
            q *= (s @ y) / (y @ y)
            for rho, al, s, y in reversed(saved):
                q += (al - rho * (y @ q)) * s
            d, t = -q, 1.0
        else:
            d, t = -gx, step0
        slope = float(gx @ d)
        if slope >= 0:
            d, slope, t = -gx, -float(gx @ gx), step0
            s_hist.clear()
            y_hist.clear()
        res = _armijo(fun, x, fx, d, t, slope)
        if res is None and s_hist:
            # quasi-Newton direction failed: restart from steepest descent
            s_hist.clear()
            y_hist.clear()
            d = -gx
            t = min(step0, last_len / max(float(np.linalg.norm(gx)), 1e-300))
            res = _armijo(fun, x, fx, d, t, -float(gx @ gx))
        if res is None:
            stuck = True
            break
        t, res = res
        fn, gn = res
        s_vec, y_vec = t * d, gn - gx
        if y_vec @ s_vec > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
            s_hist.append(s_vec)
            y_hist.append(y_vec)
        if method == "gd":
            step0 = min(4.0 * t, 1e6)
        x, fx, gx = x + s_vec, fn, gn
        last_len = float(np.linalg.norm(s_vec))
        steps += 1
        trace.append((stage, mu, fx))
    return x, fx, gx, steps, stuck


def _armijo(fun, x, fx, d, t, slope, max_halvings=40):
    for _ in range(max_halvings):
        res = fun(x + t * d)
        if res is not None and res[0] <= fx + 1e-4 * t * slope:
            return t, res
        t *= 0.5
    return None


def _lower_bound(problem: IsotropicOptProblem, e1, e2, disk_area):
    # proved only for circles in a complex line
    if abs(abs(symplectic_form(e1, e2)) - 1.0) > 1e-9:
        return None
    return (3.0 if problem.n == 2 else 2.0) * disk_area


def minimize(problem: IsotropicOptProblem, schedule: Optional[OptSchedule] = None, rng=None,
             seed: Optional[int] = None) -> OptReport:
    """Smallest-area discrete isotropic surface with the problem's boundary.

    Stage ``k`` minimises ``area + mu_k * sum_f (c_f + shift_f)^2`` from the
    previous stage's mesh; ``shift`` accumulates the constraint violations
    (all zero when ``schedule.multipliers`` is off).  The loop stops once a
    stage is stationary (see :class:`OptSchedule`).  With ``schedule.polish``
    the result is then projected onto the exact constraints.

    ``converged`` means stationary with final symplectic cosines at most
    ``residual_target``; otherwise the report says why not.  For a circle in a complex line a
    converged area below ``3 (n = 2) or 2 (n > 2) * pi r^2 * (1 - 0.02)``
    raises :class:`LowerBoundViolation`.
    """
    schedule = OptSchedule() if schedule is None else schedule
    if rng is None:
        rng = np.random.default_rng(seed)
    mesh = init_mesh(problem, rng=rng)
    f = mesh.faces
    fixed = mesh.boundary_vertices
    free, _ = _free_index(len(mesh.vertices), fixed)
    V = mesh.vertices.copy()
    dim = V.shape[1]
    c0, e1, e2, R = _fit_circle(problem.boundary)
    disk_area = math.pi * R * R
    trace: list = []

    eta = schedule.smoothing * float(face_areas(V, f).mean())

    def make_fun(mu, shift):
        def fun(x):
            W = V.copy()
            W[free] = x.reshape(-1, dim)
            try:
                val, G, A = _value_and_grad(W, f, mu, shift, eta)
            except FloatingPointError:
                return None
            if A.min() < EPS_FACE:
                return None
            return val, G[free].ravel()
        return fun

    mu = problem.penalty_weight * len(f) / disk_area
    shift = np.zeros(len(f))
    x = V[free].ravel().copy()
    g_ref = None
    gnorm = math.inf
    prev_viol = math.inf
    prev_area = float(face_areas(V, f).sum())
    stationary = False
    stalled = False
    iterations = 0
    for k in range(schedule.outer_iterations):
        fun = make_fun(mu, shift)
        fx, gx = fun(x)
        if g_ref is None:
            g_ref = max(float(np.max(np.abs(gx))), 1e-300)
        x, fx, gx, steps, stuck = _descent(fun, x, fx, gx, schedule.inner_steps, schedule.grad_tol * g_ref,
                                    schedule.method, schedule.history, trace, k, mu)
        iterations += steps
        gnorm = float(np.max(np.abs(gx))) / g_ref
        V[free] = x.reshape(-1, dim)
        om, cos = _symplectic_cosines(V, f)
        viol = float(np.linalg.norm(om))
        area_k = float(face_areas(V, f).sum())
        change = abs(area_k - prev_area) / area_k
        logger.info("stage %d mu=%.4g objective=%.10f area=%.10f change=%.2e residual=%.3e grad=%.3e",
                    k, mu, fx, area_k, change, cos.max(), gnorm)
        # a failed line search along -grad leaves no descent direction: numerically stationary
        stationary = gnorm <= schedule.grad_tol or (k > 0 and change <= schedule.ftol) or stuck
        if stuck:
            logger.info("stage %d: line search stalled after %d steps", k, steps)
            stalled = True
        if stationary and (schedule.polish or cos.max() <= schedule.residual_target):
            break
        prev_area = area_k
        if schedule.multipliers:
            shift = shift + 0.5 * om
            if viol > schedule.shrink * prev_viol:
                shift *= 1.0 / schedule.mu_growth
                mu *= schedule.mu_growth
        else:
            mu *= schedule.mu_growth
        prev_viol = viol

    final = TriMesh(V.copy(), f, mesh.orientable, EPS_FACE)
    message = ("line search stalled" if stalled else "stationary") if stationary else "budget exhausted"
    if schedule.polish:
        try:
            final = isotropic_projection(final, fixed, tol=1e-3 * schedule.residual_target)
        except RuntimeError as exc:
            logger.warning("projection failed: %s", exc)
            message += "; projection failed"

    area_final = mesh_area(final)
    residual = mesh_isotropy_residual(final)
    lower = _lower_bound(problem, e1, e2, disk_area)
    converged = residual <= schedule.residual_target and stationary
    if stationary and not converged:
        message += "; residual above target"
    if converged and lower is not None and area_final < lower * (1 - LOWER_ALLOWANCE):
        raise LowerBoundViolation(
            f"converged area {area_final:.6f} is below the lower bound {lower:.6f} less the mesh allowance")
    return OptReport(
        area=area_final,
        isotropy_residual=residual,
        area_ratio=area_final / disk_area,
        converged=bool(converged),
        boundary_area=disk_area,
        seed=seed,
        resolution=(len(problem.boundary), problem.resolution),
        topology=problem.topology,
        final_mu=mu,
        grad_norm=gnorm,
        projected_grad_norm=projected_gradient_norm(final, fixed),
        lower_bound=lower,
        iterations=iterations,
        stationary=bool(stationary),
        message=message,
        trace=[{"stage": s, "mu": m_, "objective": o} for s, m_, o in trace],
        mesh=final,
    )


def estimate_lambda(n: int = 2, plane_a: Optional[float] = None, schedule: Optional[OptSchedule] = None,
                    resolutions=((64, 16), (128, 32)), rng=None, seed: Optional[int] = 0,
                    radius: float = 1.0) -> dict:
    """Run :func:`minimize` over several resolutions and bracket ``lambda``.

    ``plane_a=None`` (or 1) uses the complex line.  Returns the rows
    (``area / (pi r^2)`` per resolution), a Richardson extrapolation of the
    last two rows assuming second-order convergence under uniform refinement,
    and the bracket ``[proved lower bound, min(observed converged values,
    3 pi / (2 sqrt 2))]``.  For non-complex planes the lower end is 0.
    """
    rows = []
    for m, res in resolutions:
        prob = IsotropicOptProblem.circle(m, radius, plane_a, n, resolution=res)
        run_rng = rng if rng is not None else np.random.default_rng(seed)
        rep = minimize(prob, schedule, rng=run_rng, seed=seed)
        rows.append({"resolution": (m, res), "area_ratio": rep.area_ratio, "residual": rep.isotropy_residual,
                     "converged": rep.converged, "report": rep})
    complex_plane = plane_a is None or plane_a == 1
    lower = (3.0 if n == 2 else 2.0) if complex_plane else 0.0
    observed = [r["area_ratio"] for r in rows if r["converged"]]
    upper = float(min(observed + [UPPER_RATIO]))
    extrap = None
    if len(rows) >= 2:
        (m1, r1), (m2, r2) = rows[-2]["resolution"], rows[-1]["resolution"]
        q = m2 / m1
        if q > 1 and abs(r2 / r1 - q) < 1e-12:
            extrap = (q * q * rows[-1]["area_ratio"] - rows[-2]["area_ratio"]) / (q * q - 1)
    return {"rows": rows, "richardson": extrap, "bracket": (lower, upper), "plane_a": plane_a, "n": n}
