"""Integral geometry in C^n: Haar-averaged angles, Crofton counts, projection functionals.

Monte-Carlo estimators return :class:`Estimate` (mean, standard error,
sample count).  Work is split into chunks, each with its own random stream
derived from the caller's generator, so results do not depend on how many
worker threads (``ISOAREA_THREADS``) evaluate them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ambient import (
    TwoPlane,
    apply_complex_structure,
    haar_unitaries,
    make_rng,
    realify,
    symplectic_form,
    wedge_norm,
)
from .surface import TriMesh, face_areas, mesh_area, mesh_isotropy_residual

__all__ = [
    "TANGENT",
    "AngleConstants",
    "CertificateReport",
    "ComplexHyperplane",
    "CroftonWindow",
    "Estimate",
    "LineThroughOrigin",
    "angle_ratio",
    "angle_sample",
    "average_angle",
    "f_functional",
    "howard_lhs_estimate",
    "howard_normalization",
    "hyperplane_mesh_intersections",
    "lagrangian_lower_bound_certificate",
    "num_integrals",
    "random_kappas",
    "rho_form",
]

CHUNK = 20_000
PARALLEL_TOL = 1e-12
EDGE_TOL = 1e-12


class _Tangent:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TANGENT"

    def __bool__(self):
        return False


#: returned by :func:`hyperplane_mesh_intersections` when a face is parallel to the hyperplane
TANGENT = _Tangent()


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int

    def __float__(self):
        return float(self.mean)

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr


@dataclass(frozen=True)
class AngleConstants:
    """Monte-Carlo angles of isotropic and complex planes with a complex hyperplane."""

    I_L: Estimate
    I_C: Estimate
    n: int


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("ISOAREA_THREADS", "1")))
    except ValueError:
        return 1


def _chunked(total: int, rng: np.random.Generator, work, chunk: int = CHUNK) -> list:
    """Run ``work(count, chunk_rng)`` over chunks; results in chunk order."""
    sizes = [chunk] * (total // chunk) + ([total % chunk] if total % chunk else [])
    seeds = rng.integers(0, 2**63 - 1, size=len(sizes))
    jobs = [(size, make_rng(int(seed))) for size, seed in zip(sizes, seeds)]
    nw = _workers()
    if nw == 1 or len(jobs) == 1:
        return [work(size, r) for size, r in jobs]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(0 if rng is None else int(rng))


# ---------------------------------------------------------------- angles


def _hyperplane_frame(n: int) -> np.ndarray:
    """Orthonormal real frame of ``C^{n-1} x {0}``, shape ``(2n-2, 2n)``."""
    return np.eye(2 * n)[: 2 * n - 2]


def angle_sample(p: TwoPlane, q_frame, U) -> float:
    """``|e1 ^ e2 ^ U v_1 ^ ... ^ U v_{2n-2}|`` for one rotation ``U`` (real ``2n x 2n``)."""
    q = np.atleast_2d(np.asarray(q_frame, dtype=float))
    dim = 2 * p.n
    if q.shape != (dim - 2, dim):
        raise ValueError(f"hyperplane frame must have shape {(dim - 2, dim)}, got {q.shape}")
    gram = q @ q.T
    if np.max(np.abs(gram - np.eye(dim - 2))) > 1e-12:
        raise ValueError("hyperplane frame is not orthonormal")
    Jq = apply_complex_structure(q)
    if np.max(np.abs(Jq - (Jq @ q.T) @ q)) > 1e-10:
        raise ValueError("frame does not span a complex hyperplane")
    U = np.asarray(U, dtype=float)
    return wedge_norm(np.vstack([p.e1, p.e2, q @ U.T]))


def _angle_batch(planes: list[TwoPlane], n: int, count: int, rng) -> np.ndarray:
    """Angle samples for several planes sharing the same Haar draws, shape ``(len(planes), count)``."""
    R = realify(haar_unitaries(n, count, rng))
    cols = R[:, :, : 2 * n - 2]  # U applied to the hyperplane frame
    out = np.empty((len(planes), count))
    for k, p in enumerate(planes):
        M = np.concatenate([np.broadcast_to(p.frame.T, (count, 2 * n, 2)), cols], axis=2)
        out[k] = np.abs(np.linalg.det(M))
    return out


def _moments(planes, n, samples, rng):
    if samples < 1:
        raise ValueError("need at least one sample")
    parts = _chunked(samples, _as_rng(rng), lambda c, r: _angle_sample_moments(planes, n, c, r))
    tot = np.sum([p[0] for p in parts], axis=0)
    sq = np.sum([p[1] for p in parts], axis=0)
    return tot / samples, sq / samples


def _angle_sample_moments(planes, n, count, rng):
    x = _angle_batch(planes, n, count, rng)
    return x.sum(axis=1), x @ x.T


def average_angle(p: TwoPlane, n: int | None = None, samples: int = 100_000, rng=None) -> Estimate:
    """Haar average of the angle between ``p`` and the complex hyperplane ``z_n = 0``.

    The value depends only on the ``U(n)``-orbit of ``p``.
    """
    n = p.n if n is None else n
    if n != p.n:
        raise ValueError(f"plane lives in C^{p.n}, not C^{n}")
    mean, second = _moments([p], n, samples, rng)
    var = max(second[0, 0] - mean[0] ** 2, 0.0)
    return Estimate(float(mean[0]), math.sqrt(var / samples), samples)


def _reference_planes(n: int) -> tuple[TwoPlane, TwoPlane]:
    I = np.eye(2 * n)
    return TwoPlane(I[0], I[1]), TwoPlane(I[0], I[2])


def angle_ratio(n: int = 2, samples: int = 1_000_000, rng=None) -> tuple[Estimate, AngleConstants]:
    """``I_C / I_L`` from common Haar draws, with a delta-method standard error.

    ``I_C`` uses the complex line ``C x {0}``, ``I_L`` the plane spanned by the
    real axes of ``z_1`` and ``z_2``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    complex_p, iso_p = _reference_planes(n)
    mean, second = _moments([complex_p, iso_p], n, samples, rng)
    cov = second - np.outer(mean, mean)
    mc, ml = mean
    r = mc / ml
    rel_var = cov[0, 0] / mc**2 + cov[1, 1] / ml**2 - 2 * cov[0, 1] / (mc * ml)
    ratio = Estimate(float(r), float(abs(r) * math.sqrt(max(rel_var, 0.0) / samples)), samples)
    consts = AngleConstants(
        I_L=Estimate(float(ml), float(math.sqrt(max(cov[1, 1], 0.0) / samples)), samples),
        I_C=Estimate(float(mc), float(math.sqrt(max(cov[0, 0], 0.0) / samples)), samples),
        n=n,
    )
    return ratio, consts


# ---------------------------------------------------------------- hyperplanes


@dataclass(frozen=True)
class ComplexHyperplane:
    """``{z : z . normal = c1, z . J normal = c2}`` (real dot products).

    ``normal`` and ``J normal`` span the complex normal line.
    """

    normal: np.ndarray
    offset: tuple = (0.0, 0.0)

    def __post_init__(self):
        nu = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
            raise ValueError("hyperplane normal must be a unit vector")
        object.__setattr__(self, "normal", nu)
        object.__setattr__(self, "offset", (float(self.offset[0]), float(self.offset[1])))

    @classmethod
    def through(cls, point, normal) -> "ComplexHyperplane":
        nu = np.asarray(normal, dtype=float)
        nu = nu / np.linalg.norm(nu)
        x = np.asarray(point, dtype=float)
        return cls(nu, (x @ nu, x @ apply_complex_structure(nu)))

    def values(self, x) -> np.ndarray:
        """The two defining functions at point(s) ``x``, shape ``(..., 2)``."""
        x = np.asarray(x, dtype=float)
        nu, Jnu = self.normal, apply_complex_structure(self.normal)
        return np.stack([x @ nu - self.offset[0], x @ Jnu - self.offset[1]], axis=-1)


def _segment_distance(p, q):
    """Distance from the origin to segment ``pq`` in the plane (arrays of shape (..., 2))."""
    d = q - p
    dd = np.sum(d * d, axis=-1)
    lam = np.clip(np.where(dd > 0, -np.sum(p * d, axis=-1) / np.where(dd > 0, dd, 1.0), 0.0), 0.0, 1.0)
    return np.linalg.norm(p + lam[..., None] * d, axis=-1)


def _solve_faces(g0, g1, g2, scale):
    """Cramer solve of ``g0 + l1 (g1-g0) + l2 (g2-g0) = 0`` per face.

    Returns barycentrics ``(l0, l1, l2)`` and a mask of faces parallel to the hyperplane.
    """
    a, b = g1 - g0, g2 - g0
    det = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    parallel = np.abs(det) <= PARALLEL_TOL * scale
    safe = np.where(parallel, 1.0, det)
    l1 = (-g0[..., 0] * b[..., 1] + g0[..., 1] * b[..., 0]) / safe
    l2 = (-a[..., 0] * g0[..., 1] + a[..., 1] * g0[..., 0]) / safe
    return 1.0 - l1 - l2, l1, l2, parallel


def _face_scale(mesh: TriMesh) -> np.ndarray:
    # |a||b| per face; the determinant is compared against this
    v, f = mesh.vertices, mesh.faces
    a = v[f[:, 1]] - v[f[:, 0]]
    b = v[f[:, 2]] - v[f[:, 0]]
    return np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)


def hyperplane_hits(mesh: TriMesh, eta: ComplexHyperplane):
    """Intersection points of ``mesh`` with ``eta``, or :data:`TANGENT`.

    Hits on shared edges or vertices are reported once, by the face with the
    smallest index.
    """
    if mesh.n != 2:
        raise NotImplementedError(f"intersection counting is implemented for n = 2 only, got n = {mesh.n}")
    f = mesh.faces
    g = eta.values(mesh.vertices)
    g0, g1, g2 = g[f[:, 0]], g[f[:, 1]], g[f[:, 2]]
    scale = _face_scale(mesh)
    l0, l1, l2, parallel = _solve_faces(g0, g1, g2, scale)
    if np.any(parallel):
        gs = np.sqrt(scale[parallel])
        p0, p1, p2 = g0[parallel], g1[parallel], g2[parallel]
        reach = np.minimum(np.minimum(_segment_distance(p0, p1), _segment_distance(p1, p2)),
                           _segment_distance(p2, p0))
        if np.any(reach <= PARALLEL_TOL * gs):
            return TANGENT
    lam = np.stack([l0, l1, l2], axis=1)
    lam[parallel] = -1.0
    inside = np.all(lam >= -EDGE_TOL, axis=1)
    idx = np.flatnonzero(inside)
    v = mesh.vertices
    pts = lam[idx, 0, None] * v[f[idx, 0]] + lam[idx, 1, None] * v[f[idx, 1]] + lam[idx, 2, None] * v[f[idx, 2]]
    on_edge = np.any(lam[idx] <= EDGE_TOL, axis=1)
    keep = []
    owned: list[np.ndarray] = []
    tol = 1e-9 * max(1.0, float(np.abs(v).max()))
    for k, face in enumerate(idx):  # idx is increasing, so the first owner is the smallest face
        if on_edge[k]:
            if any(np.linalg.norm(pts[k] - o) <= tol for o in owned):
                continue
            owned.append(pts[k])
        keep.append(k)
    return pts[keep], idx[keep]


def hyperplane_mesh_intersections(mesh: TriMesh, eta: ComplexHyperplane):
    """Number of points in ``mesh`` on the complex hyperplane ``eta`` (``n = 2``).

    Returns :data:`TANGENT` when a face is parallel to ``eta`` and could touch
    it; the caller should resample ``eta``.
    """
    res = hyperplane_hits(mesh, eta)
    if res is TANGENT:
        return TANGENT
    return len(res[0])


# ---------------------------------------------------------------- Crofton / Howard


def ball_volume(dim: int, radius: float) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * radius**dim


@dataclass(frozen=True)
class CroftonWindow:
    """Translations uniform in the ball ``B(center, radius)``, rotations Haar."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ValueError("window radius must be positive")

    @property
    def volume(self) -> float:
        return ball_volume(self.center.shape[0], self.radius)

    @classmethod
    def enclosing(cls, fixed: TriMesh, moving: TriMesh, margin: float = 1.0) -> "CroftonWindow":
        """Smallest valid ball about the fixed body's vertex centroid, times ``margin``."""
        c = fixed.vertices.mean(axis=0)
        r = np.linalg.norm(fixed.vertices - c, axis=1).max() + _reach(moving)
        return cls(c, margin * r)

    def validate(self, fixed: TriMesh, moving: TriMesh) -> None:
        """Every translate of a rotated ``moving`` that meets ``fixed`` must be inside the window."""
        far = np.linalg.norm(fixed.vertices - self.center, axis=1).max()
        if far > self.radius - _reach(moving) + 1e-12:
            raise ValueError(
                f"window radius {self.radius:.6g} too small: fixed body reaches {far:.6g} "
                f"and the moving body extends {_reach(moving):.6g} from the rotation centre")

    def sample_translations(self, count: int, rng) -> np.ndarray:
        dim = self.center.shape[0]
        d = rng.standard_normal((count, dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.random(count) ** (1.0 / dim)
        return self.center + r[:, None] * d


def _reach(mesh: TriMesh) -> float:
    return float(np.linalg.norm(mesh.vertices, axis=1).max())


def _check_in_first_line(Q: TriMesh):
    off = np.abs(Q.vertices[:, 2:]).max() if Q.vertices.shape[1] > 2 else 0.0
    if off > 1e-12:
        raise ValueError("moving body must lie in the complex line C x {0}")


def _points_in_mesh2d(pts, Q: TriMesh) -> np.ndarray:
    """Whether planar points ``(m, 2)`` (first complex coordinate) lie in the flat mesh ``Q``."""
    if len(pts) == 0:
        return np.zeros(0, dtype=bool)
    v = Q.vertices[:, :2]
    f = Q.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    e1, e2 = b - a, c - a
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    d = pts[:, None, :] - a[None]
    l1 = (d[..., 0] * e2[:, 1] - d[..., 1] * e2[:, 0]) / det
    l2 = (e1[:, 0] * d[..., 1] - e1[:, 1] * d[..., 0]) / det
    return np.any((l1 >= 0) & (l2 >= 0) & (l1 + l2 <= 1), axis=1)


def _count_batch(P: TriMesh, Q: TriMesh, R: np.ndarray, X: np.ndarray):
    """Counts ``#(P cap (R Q + X))`` per sample; ``-1`` marks tangent samples."""
    m = len(R)
    nu = R[:, :, 2]   # U e_{x2}: spans the complex normal line with J nu = U e_{y2}
    Jnu = R[:, :, 3]
    counts = np.zeros(m, dtype=np.int64)
    # lines missing the bounding ball of P cannot meet it
    c = P.vertices.mean(axis=0)
    rad = np.linalg.norm(P.vertices - c, axis=1).max()
    dc = c - X
    dist = np.hypot(np.sum(dc * nu, axis=1), np.sum(dc * Jnu, axis=1))
    near = np.flatnonzero(dist <= rad * (1 + 1e-9))
    if near.size == 0:
        return counts
    if near.size < m:
        counts[near] = _count_batch(P, Q, R[near], X[near])
        return counts
    V = P.vertices
    f = P.faces
    g = np.stack([V @ nu.T - np.sum(X * nu, axis=1), V @ Jnu.T - np.sum(X * Jnu, axis=1)], axis=-1)
    g = np.transpose(g, (1, 0, 2))  # (m, nv, 2)
    g0, g1, g2 = g[:, f[:, 0]], g[:, f[:, 1]], g[:, f[:, 2]]
    scale = _face_scale(P)[None]
    l0, l1, l2, parallel = _solve_faces(g0, g1, g2, scale)
    lam_min = np.minimum(np.minimum(l0, l1), l2)
    lam_min = np.where(parallel, -1.0, lam_min)
    inside = lam_min >= 0
    # near-edge and parallel events go through the exact single-sample path
    delicate = np.any((np.abs(lam_min) <= 1e-9) & ~parallel, axis=1) | np.any(parallel, axis=1)

    si, fi = np.nonzero(inside & ~delicate[:, None])
    if si.size:
        bary = np.stack([l0[si, fi], l1[si, fi], l2[si, fi]], axis=1)
        pts = np.einsum("kj,kjd->kd", bary, V[f[fi]])
        local = np.einsum("kij,ki->kj", R[si], pts - X[si])  # R^T (p - x)
        hit = _points_in_mesh2d(local[:, :2], Q)
        np.add.at(counts, si[hit], 1)
    for k in np.flatnonzero(delicate):
        eta = ComplexHyperplane(nu[k], (X[k] @ nu[k], X[k] @ Jnu[k]))
        res = hyperplane_hits(P, eta)
        if res is TANGENT:
            counts[k] = -1
            continue
        pts = res[0]
        local = (pts - X[k]) @ R[k]
        counts[k] = int(np.sum(_points_in_mesh2d(local[:, :2], Q)))
    return counts


def howard_lhs_estimate(P_mesh: TriMesh, Q_mesh: TriMesh, window: CroftonWindow, samples: int = 1_000_000,
                        rng=None) -> Estimate:
    """Windowed Monte-Carlo estimate of ``int_G #(P cap gQ) dg`` in C^2.

    ``g`` is a Haar rotation about the origin followed by a translation
    uniform in the window; the measure is (Haar probability) x (Lebesgue),
    so the estimate is ``window.volume * mean(count)``.  ``Q_mesh`` must lie
    in the complex line ``C x {0}``.  Samples where a face of ``P`` is
    parallel to ``gQ`` are redrawn (discarded; reported via the sample count).
    """
    if P_mesh.n != 2 or Q_mesh.n != 2:
        raise NotImplementedError("Crofton counting is implemented for n = 2 only")
    _check_in_first_line(Q_mesh)
    window.validate(P_mesh, Q_mesh)

    def work(count, r):
        R = realify(haar_unitaries(2, count, r))
        X = window.sample_translations(count, r)
        c = _count_batch(P_mesh, Q_mesh, R, X)
        ok = c >= 0
        c = c[ok].astype(float)
        return c.sum(), (c * c).sum(), int(ok.sum())

    parts = _chunked(samples, _as_rng(rng), work, chunk=5_000)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    m = sum(p[2] for p in parts)
    mean = s1 / m
    var = max(s2 / m - mean * mean, 0.0)
    vol = window.volume
    return Estimate(float(vol * mean), float(vol * math.sqrt(var / m)), m)


def howard_normalization(lhs: Estimate, P_mesh: TriMesh, Q_mesh: TriMesh, angle: Estimate) -> Estimate:
    """``lhs / (Area(Q) Area(P) angle)``; equals 1 for the probability-Haar x Lebesgue measure."""
    denom = mesh_area(Q_mesh) * mesh_area(P_mesh) * angle.mean
    rel = math.hypot(lhs.stderr / lhs.mean, angle.stderr / angle.mean)
    val = lhs.mean / denom
    return Estimate(val, abs(val) * rel, lhs.samples)


# ---------------------------------------------------------------- projections onto lines


@dataclass(frozen=True)
class LineThroughOrigin:
    """The complex line ``C * direction`` in C^2."""

    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        object.__setattr__(self, "direction", d)

    @classmethod
    def from_complex(cls, d1: complex, d2: complex) -> "LineThroughOrigin":
        norm = math.hypot(abs(d1), abs(d2))
        return cls(np.array([d1.real, d1.imag, d2.real, d2.imag]) / norm)

    @property
    def perp(self) -> "LineThroughOrigin":
        x1, y1, x2, y2 = self.direction
        # (d1, d2) -> (-conj d2, conj d1)
        return LineThroughOrigin(np.array([-x2, y2, x1, -y1]))

    @property
    def cos2_alpha(self) -> float:
        """Squared cosine of the angle with ``C x {0}``, i.e. ``|d1|^2``."""
        return float(self.direction[0] ** 2 + self.direction[1] ** 2)

    @property
    def plane(self) -> TwoPlane:
        return TwoPlane(self.direction, apply_complex_structure(self.direction))


def random_kappas(count: int, rng) -> list[LineThroughOrigin]:
    """Lines distributed by the Fubini-Study measure (uniform unit direction)."""
    d = rng.standard_normal((count, 4))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return [LineThroughOrigin(x) for x in d]


def rho_form(kappa: LineThroughOrigin, u, v):
    """Signed area of the orthogonal projections of ``u, v`` onto ``kappa``.

    The orientation of ``kappa`` is ``(d, J d)``; the kernel is ``kappa^perp``
    and ``rho_kappa + rho_{kappa^perp} = omega``.
    """
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape[-1] != 4 or v.shape[-1] != 4:
        raise ValueError("rho_form is defined on C^2")
    d = kappa.direction
    Jd = apply_complex_structure(d)
    return (u @ d) * (v @ Jd) - (u @ Jd) * (v @ d)


def f_functional(mesh: TriMesh, kappa: LineThroughOrigin) -> float:
    """``int_P |rho_kappa|``: projected area onto ``kappa`` counted with multiplicity."""
    if mesh.n != 2:
        raise ValueError("f_functional is defined on C^2")
    v, f = mesh.vertices, mesh.faces
    a = v[f[:, 1]] - v[f[:, 0]]
    b = v[f[:, 2]] - v[f[:, 0]]
    return float(0.5 * np.sum(np.abs(rho_form(kappa, a, b))))


def _f_functional_many(mesh: TriMesh, directions: np.ndarray) -> np.ndarray:
    v, f = mesh.vertices, mesh.faces
    a = v[f[:, 1]] - v[f[:, 0]]
    b = v[f[:, 2]] - v[f[:, 0]]
    D = directions
    JD = apply_complex_structure(D)
    rho = (a @ D.T) * (b @ JD.T) - (a @ JD.T) * (b @ D.T)
    return 0.5 * np.abs(rho).sum(axis=0)


def num_integrals(quad_radial_nodes: int = 256, angular_nodes: int = 16) -> tuple[float, float]:
    """``Num_C = int_{CP^1} cos^2`` and ``Num_L = 2 int_{alpha <= pi/4} cos^2``.

    Computed in the affine chart ``z = x + iy`` with ``cos^2 alpha = 1/(1+|z|^2)``
    and area form ``2 dx dy / (1+|z|^2)^2``, in polar coordinates with
    ``|z| = tan(phi/2)``, which maps ``[0, inf)`` onto ``[0, pi)`` and the
    region ``|z| <= 1`` onto ``phi <= pi/2``.
    """
    if quad_radial_nodes < 32:
        raise ValueError("need at least 32 radial nodes")
    x, w = np.polynomial.legendre.leggauss(quad_radial_nodes)
    theta = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    wtheta = np.full(angular_nodes, 2 * np.pi / angular_nodes)

    def integrate(phi_max: float) -> float:
        phi = 0.5 * phi_max * (x + 1.0)
        wphi = 0.5 * phi_max * w
        r = np.tan(phi / 2)
        dr = 0.5 / np.cos(phi / 2) ** 2
        radial = (1.0 / (1 + r * r)) * (2.0 / (1 + r * r) ** 2) * r * dr
        # integrand has no theta dependence; the tensor rule still sums over it
        return float(np.sum(np.outer(wphi * radial, wtheta)))

    return integrate(np.pi), 2.0 * integrate(np.pi / 2)


# ---------------------------------------------------------------- lower-bound harness


@dataclass
class CertificateReport:
    n_kappa: int
    area_S: float
    area_D: float
    implied_ratio_bound: float
    implied_ratio_stderr: float
    crofton_area_ratio: float
    min_projection_margin: float
    max_lagrangian_asymmetry: float
    isotropy_residual: float
    passed: bool
    notes: list = field(default_factory=list)

    @property
    def area_ratio(self) -> float:
        return self.area_S / self.area_D


def _hausdorff(A, B) -> float:
    d = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def lagrangian_lower_bound_certificate(S_mesh: TriMesh, D_mesh: TriMesh, kappas: int = 10_000, rng=None,
                                       *, isotropy_tol: float = 1e-3, boundary_tol: float = 1e-6,
                                       projection_tol: float = 1e-9) -> CertificateReport:
    """Check the projection argument behind ``Area(S) >= 3 Area(D)`` on sampled lines.

    For each sampled line ``kappa`` the harness evaluates ``F(S, kappa)``,
    ``F(S, kappa^perp)``, ``F(D, kappa)`` and ``F(D, kappa^perp)``.  Since ``S``
    is Lagrangian with the boundary of the flat disk ``D``, each of ``F(S, .)``
    dominates both disk values, so averaging gives

        Area(S) / Area(D) >= (I_C / I_L) * E[max(F_D(k), F_D(k^perp))] / E[F_D(k)],

    with ``I_C / I_L = 2``.  The right side is reported as the implied ratio
    bound.  This is a numerical check, not a proof.

    Raises
    ------
    ValueError
        If ``S`` is not Lagrangian within ``isotropy_tol``, ``D`` does not lie
        in ``C x {0}``, or the boundaries differ by more than ``boundary_tol``.
    """
    if S_mesh.n != 2 or D_mesh.n != 2:
        raise ValueError("certificate is defined on C^2")
    res = mesh_isotropy_residual(S_mesh)
    if res > isotropy_tol:
        raise ValueError(f"S is not Lagrangian: per-face symplectic cosine {res:.3e} > {isotropy_tol:g}")
    if np.abs(D_mesh.vertices[:, 2:]).max() > 1e-12:
        raise ValueError("D must be a flat region in C x {0}")
    bS = S_mesh.vertices[S_mesh.boundary_vertices]
    bD = D_mesh.vertices[D_mesh.boundary_vertices]
    gap = _hausdorff(bS, bD)
    if gap > boundary_tol:
        raise ValueError(f"boundaries of S and D differ (Hausdorff distance {gap:.3e})")

    rng = _as_rng(rng)
    d = rng.standard_normal((kappas, 4))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    dp = np.stack([-d[:, 2], d[:, 3], d[:, 0], -d[:, 1]], axis=1)
    FS = np.empty(kappas)
    FSp = np.empty(kappas)
    FD = np.empty(kappas)
    FDp = np.empty(kappas)
    step = 512
    for lo in range(0, kappas, step):
        sl = slice(lo, lo + step)
        FS[sl] = _f_functional_many(S_mesh, d[sl])
        FSp[sl] = _f_functional_many(S_mesh, dp[sl])
        FD[sl] = _f_functional_many(D_mesh, d[sl])
        FDp[sl] = _f_functional_many(D_mesh, dp[sl])

    top = np.maximum(FD, FDp)
    margin = float(np.min(np.minimum(FS - FD, FSp - FDp)))
    asym = float(np.max(np.abs(FS - FSp)))
    ratio_mech = 2.0 * top.mean() / FD.mean()
    # delta-method error of a ratio of means
    cov = np.cov(np.stack([top, FD]))
    rel = cov[0, 0] / top.mean() ** 2 + cov[1, 1] / FD.mean() ** 2 - 2 * cov[0, 1] / (top.mean() * FD.mean())
    stderr = float(ratio_mech * math.sqrt(max(rel, 0.0) / kappas))
    crofton_ratio = float(2.0 * FS.mean() / FD.mean())
    area_S = float(np.sum(face_areas(S_mesh.vertices, S_mesh.faces)))
    area_D = float(np.sum(face_areas(D_mesh.vertices, D_mesh.faces)))
    notes = []
    if margin < -projection_tol * area_D:
        notes.append(f"projection inequality violated by {-margin:.3e}")
    return CertificateReport(
        n_kappa=kappas,
        area_S=area_S,
        area_D=area_D,
        implied_ratio_bound=float(ratio_mech),
        implied_ratio_stderr=stderr,
        crofton_area_ratio=crofton_ratio,
        min_projection_margin=margin,
        max_lagrangian_asymmetry=asym,
        isotropy_residual=res,
        passed=bool(not notes and area_S / area_D >= ratio_mech - 3 * stderr),
        notes=notes,
    )
