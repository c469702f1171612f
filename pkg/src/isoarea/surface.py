"""Parametric surfaces, quadrature, triangle meshes and mesh file formats."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .ambient import symplectic_form

__all__ = [
    "IDENTIFICATIONS",
    "ParamSurface",
    "QuadratureSpec",
    "TriMesh",
    "apply_motion",
    "area",
    "derivatives",
    "disk_mesh",
    "first_fundamental_form",
    "flat_chart",
    "face_areas",
    "isotropy_residual",
    "mesh_area",
    "mesh_isotropy_residual",
    "read_mesh_csv",
    "scaled",
    "triangulate",
    "write_mesh_csv",
    "write_obj",
]

IDENTIFICATIONS = ("none", "cylinder", "mobius")
IDENT_TOL = 1e-10
FD_REL_STEP = 1e-6

SurfaceMap = Callable[[np.ndarray, np.ndarray], np.ndarray]
Jacobian = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class ParamSurface:
    """A map ``(t, s) -> R^{2n}`` on a rectangle, possibly with glued edges.

    ``map`` and ``jacobian`` must broadcast over array arguments: for inputs
    of shape ``S`` they return arrays of shape ``S + (2n,)``.

    ``identification`` is one of ``"none"``, ``"cylinder"`` (``t0 ~ t1``) or
    ``"mobius"`` (cylinder plus ``(t, s1) ~ (t + half period, s1)``).
    """

    map: SurfaceMap
    domain: tuple
    n: int
    identification: str = "none"
    jacobian: Optional[Jacobian] = None
    name: str = ""

    def __post_init__(self):
        if self.identification not in IDENTIFICATIONS:
            raise ValueError(f"unknown identification {self.identification!r}")
        t0, t1, s0, s1 = map(float, self.domain)
        if not (t1 > t0 and s1 > s0):
            raise ValueError(f"empty domain {self.domain}")
        object.__setattr__(self, "domain", (t0, t1, s0, s1))
        self._check_identifications()

    def __call__(self, t, s) -> np.ndarray:
        return self.map(np.asarray(t, dtype=float), np.asarray(s, dtype=float))

    @property
    def extent(self) -> tuple[float, float]:
        t0, t1, s0, s1 = self.domain
        return t1 - t0, s1 - s0

    def _check_identifications(self, samples: int = 64):
        if self.identification == "none":
            return
        t0, t1, s0, s1 = self.domain
        ss = np.linspace(s0, s1, samples)
        gap = np.max(np.abs(self(np.full_like(ss, t0), ss) - self(np.full_like(ss, t1), ss)))
        if gap > IDENT_TOL:
            raise ValueError(f"map is not periodic across t0 ~ t1 (gap {gap:.3e})")
        if self.identification == "mobius":
            half = 0.5 * (t1 - t0)
            ts = np.linspace(t0, t0 + half, samples)
            top = np.full_like(ts, s1)
            gap = np.max(np.abs(self(ts, top) - self(ts + half, top)))
            if gap > IDENT_TOL:
                raise ValueError(f"map does not respect the mobius gluing (gap {gap:.3e})")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre rule with ``nodes_t x nodes_s`` points."""

    nodes_t: int = 64
    nodes_s: int = 64

    def __post_init__(self):
        if self.nodes_t < 2 or self.nodes_s < 2:
            raise ValueError("need at least 2 nodes per direction")

    def nodes(self, domain) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(T, S, W)`` meshgrids of nodes and product weights on ``domain``."""
        t0, t1, s0, s1 = domain
        xt, wt = np.polynomial.legendre.leggauss(self.nodes_t)
        xs, ws = np.polynomial.legendre.leggauss(self.nodes_s)
        t = 0.5 * (t1 - t0) * (xt + 1.0) + t0
        s = 0.5 * (s1 - s0) * (xs + 1.0) + s0
        w = np.outer(wt, ws) * 0.25 * (t1 - t0) * (s1 - s0)
        T, S = np.meshgrid(t, s, indexing="ij")
        return T, S, w


def _check_in_domain(surf: ParamSurface, t, s):
    t0, t1, s0, s1 = surf.domain
    et, es = surf.extent
    slack = 1e-12
    if (np.any(t < t0 - slack * et) or np.any(t > t1 + slack * et)
            or np.any(s < s0 - slack * es) or np.any(s > s1 + slack * es)):
        raise ValueError(f"evaluation outside the domain {surf.domain}")


def _fd_partial(surf: ParamSurface, t, s, axis: int):
    """Second-order finite difference in ``t`` (axis 0) or ``s`` (axis 1)."""
    t0, t1, s0, s1 = surf.domain
    lo, hi = (t0, t1) if axis == 0 else (s0, s1)
    h = FD_REL_STEP * (hi - lo)
    x = t if axis == 0 else s

    def at(offset):
        return surf(x + offset, s) if axis == 0 else surf(t, x + offset)

    fwd = (x - h) < lo
    bwd = (x + h) > hi
    central = (at(h) - at(-h)) / (2 * h)
    if not (np.any(fwd) or np.any(bwd)):
        return central
    f0 = at(0.0)
    one_fwd = (-3 * f0 + 4 * at(h) - at(2 * h)) / (2 * h)
    one_bwd = (3 * f0 - 4 * at(-h) + at(-2 * h)) / (2 * h)
    out = np.where(fwd[..., None], one_fwd, central)
    return np.where(bwd[..., None], one_bwd, out)


def derivatives(surf: ParamSurface, t, s, *, numeric: bool = False):
    """Partial derivatives ``(F_t, F_s)`` at ``(t, s)``.

    Uses the analytic jacobian when the surface carries one (unless
    ``numeric=True``); otherwise central differences with step
    ``1e-6 * extent``, switching to one-sided second-order stencils at the
    edges of the domain.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    t, s = np.broadcast_arrays(t, s)
    _check_in_domain(surf, t, s)
    if surf.jacobian is not None and not numeric:
        Ft, Fs = surf.jacobian(t, s)
        return np.asarray(Ft, dtype=float), np.asarray(Fs, dtype=float)
    return _fd_partial(surf, t, s, 0), _fd_partial(surf, t, s, 1)


def first_fundamental_form(surf: ParamSurface, t, s, *, numeric: bool = False):
    """Metric coefficients ``E = Ft.Ft``, ``F = Ft.Fs``, ``G = Fs.Fs``."""
    Ft, Fs = derivatives(surf, t, s, numeric=numeric)
    E = np.sum(Ft * Ft, axis=-1)
    F = np.sum(Ft * Fs, axis=-1)
    G = np.sum(Fs * Fs, axis=-1)
    return E, F, G


def area(surf: ParamSurface, quad: QuadratureSpec = QuadratureSpec(), *, numeric: bool = False) -> float:
    """Area by tensor Gauss-Legendre quadrature of ``sqrt(EG - F^2)``."""
    T, S, W = quad.nodes(surf.domain)
    E, F, G = first_fundamental_form(surf, T, S, numeric=numeric)
    integrand = np.sqrt(np.maximum(E * G - F * F, 0.0))
    bad = ~np.isfinite(integrand)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise FloatingPointError(
            f"non-finite area element at node (t={T[i, j]:.17g}, s={S[i, j]:.17g})")
    return float(np.sum(W * integrand))


def isotropy_residual(surf: ParamSurface, grid: QuadratureSpec = QuadratureSpec(), *,
                      numeric: bool = False) -> float:
    """Largest ``|omega(F_t, F_s)|`` over the quadrature nodes."""
    T, S, _ = grid.nodes(surf.domain)
    Ft, Fs = derivatives(surf, T, S, numeric=numeric)
    return float(np.max(np.abs(symplectic_form(Ft, Fs))))


def apply_motion(surf: ParamSurface, R=None, shift=None, scale: float = 1.0) -> ParamSurface:
    """Image of ``surf`` under ``x -> scale * R x + shift``."""
    dim = 2 * surf.n
    R = np.eye(dim) if R is None else np.asarray(R, dtype=float)
    shift = np.zeros(dim) if shift is None else np.asarray(shift, dtype=float)
    base, jac = surf.map, surf.jacobian

    def moved(t, s):
        return scale * base(t, s) @ R.T + shift

    moved_jac = None
    if jac is not None:
        def moved_jac(t, s):
            Ft, Fs = jac(t, s)
            return scale * Ft @ R.T, scale * Fs @ R.T

    return ParamSurface(moved, surf.domain, surf.n, surf.identification, moved_jac, surf.name)


def scaled(surf: ParamSurface, c: float) -> ParamSurface:
    return apply_motion(surf, scale=c)


def flat_chart(u, v, domain=(0.0, 1.0, 0.0, 1.0), origin=None) -> ParamSurface:
    """The affine chart ``(t, s) -> origin + t u + s v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    o = np.zeros_like(u) if origin is None else np.asarray(origin, dtype=float)

    def fmap(t, s):
        return o + np.multiply.outer(t, u) + np.multiply.outer(s, v)

    def jac(t, s):
        shape = np.broadcast(t, s).shape
        return np.broadcast_to(u, shape + u.shape), np.broadcast_to(v, shape + v.shape)

    return ParamSurface(fmap, domain, u.shape[0] // 2, "none", jac, "flat")


# ---------------------------------------------------------------- meshes


def _face_vectors(vertices, faces):
    v0 = vertices[faces[:, 0]]
    return vertices[faces[:, 1]] - v0, vertices[faces[:, 2]] - v0


def face_areas(vertices, faces) -> np.ndarray:
    a, b = _face_vectors(vertices, faces)
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    ab = np.einsum("ij,ij->i", a, b)
    return 0.5 * np.sqrt(np.maximum(aa * bb - ab * ab, 0.0))


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Indexed triangle mesh in R^{2n}.

    The boundary is derived from edge incidence (edges with exactly one
    adjacent face).  ``orientable`` records whether the construction admits
    a consistent face orientation; :meth:`check_orientable` verifies it.
    """

    vertices: np.ndarray
    faces: np.ndarray
    orientable: bool = True
    min_face_area: float = field(default=0.0, repr=False)

    def __post_init__(self):
        V = np.ascontiguousarray(self.vertices, dtype=float)
        Fc = np.ascontiguousarray(self.faces, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] % 2:
            raise ValueError(f"vertices must be (V, 2n), got {V.shape}")
        if Fc.ndim != 2 or Fc.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {Fc.shape}")
        if Fc.size and (Fc.min() < 0 or Fc.max() >= len(V)):
            raise ValueError("face index out of range")
        areas = face_areas(V, Fc)
        bad = np.flatnonzero(areas <= self.min_face_area)
        if bad.size:
            raise ValueError(f"degenerate face {int(bad[0])} (area {areas[bad[0]]:.3e})")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "faces", Fc)

    @property
    def n(self) -> int:
        return self.vertices.shape[1] // 2

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted pairs."""
        return self._edge_data[0]

    @cached_property
    def _edge_data(self):
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        uniq, inverse, counts = np.unique(e, axis=0, return_inverse=True, return_counts=True)
        return uniq, inverse.ravel(), counts

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        uniq, _, counts = self._edge_data
        if np.any(counts > 2):
            raise ValueError("non-manifold edge with more than two faces")
        return uniq[counts == 1]

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def boundary_cycles(self) -> list[list[int]]:
        """Boundary components as ordered vertex cycles."""
        nbrs: dict[int, list[int]] = {}
        for a, b in self.boundary_edges:
            nbrs.setdefault(int(a), []).append(int(b))
            nbrs.setdefault(int(b), []).append(int(a))
        if any(len(v) != 2 for v in nbrs.values()):
            raise ValueError("boundary is not a disjoint union of cycles")
        seen: set[int] = set()
        cycles = []
        for start in sorted(nbrs):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            prev, cur = start, nbrs[start][0]
            while cur != start:
                cyc.append(cur)
                seen.add(cur)
                a, b = nbrs[cur]
                prev, cur = cur, (b if a == prev else a)
            cycles.append(cyc)
        return cycles

    def check_orientable(self) -> bool:
        """Propagate orientations across shared edges; False on a contradiction."""
        f = self.faces
        _, inverse, _ = self._edge_data
        nf = len(f)
        edge_faces: dict[int, list[tuple[int, int]]] = {}
        for k in range(3):
            a, b = f[:, k], f[:, (k + 1) % 3]
            sign = np.where(a < b, 1, -1)
            for i in range(nf):
                edge_faces.setdefault(int(inverse[k * nf + i]), []).append((i, int(sign[i])))
        adj: list[list[tuple[int, int]]] = [[] for _ in range(nf)]
        for lst in edge_faces.values():
            if len(lst) == 2:
                (i, si), (j, sj) = lst
                # consistent orientations traverse the shared edge oppositely
                rel = -si * sj
                adj[i].append((j, rel))
                adj[j].append((i, rel))
        orient = np.zeros(nf, dtype=int)
        for root in range(nf):
            if orient[root]:
                continue
            orient[root] = 1
            stack = [root]
            while stack:
                i = stack.pop()
                for j, rel in adj[i]:
                    want = orient[i] * rel
                    if orient[j] == 0:
                        orient[j] = want
                        stack.append(j)
                    elif orient[j] != want:
                        return False
        return True

    def with_vertices(self, vertices) -> "TriMesh":
        return TriMesh(vertices, self.faces, self.orientable, self.min_face_area)


def mesh_area(mesh: TriMesh) -> float:
    """Sum of triangle areas."""
    return float(np.sum(face_areas(mesh.vertices, mesh.faces)))


def mesh_isotropy_residual(mesh: TriMesh) -> float:
    """Largest per-face symplectic cosine ``|omega(e1, e2)| / (2 area)``."""
    a, b = _face_vectors(mesh.vertices, mesh.faces)
    om = np.abs(symplectic_form(a, b))
    return float(np.max(om / (2.0 * face_areas(mesh.vertices, mesh.faces))))


def triangulate(surf: ParamSurface, res_t: int, res_s: int, *, collapse_poles: bool = True,
                diagonals: str = "uniform") -> TriMesh:
    """Regular ``res_t x res_s`` cell grid split into triangles.

    Vertices on identified edges are shared: ``t1`` is glued to ``t0`` for
    cylinder and mobius surfaces, and the mobius top row is glued to itself
    shifted by half a period (``res_t`` must then be even).  With
    ``collapse_poles`` a grid row mapped to a single point (as at the centre
    of a polar chart) is merged into one vertex and the resulting
    zero-area triangles are dropped.

    ``diagonals="uniform"`` splits every cell along the same diagonal;
    ``"alternating"`` flips the diagonal in every other column of cells,
    which removes the directional bias of a uniform split.
    """
    if diagonals not in ("uniform", "alternating"):
        raise ValueError(f"unknown diagonal pattern {diagonals!r}")
    if res_t < 2 or res_s < 2:
        raise ValueError("need res_t, res_s >= 2")
    ident = surf.identification
    if ident == "mobius" and res_t % 2:
        raise ValueError("mobius triangulation needs an even res_t")
    t0, t1, s0, s1 = surf.domain
    periodic = ident in ("cylinder", "mobius")
    nt = res_t if periodic else res_t + 1
    ts = np.linspace(t0, t1, res_t + 1)[:nt]
    ss = np.linspace(s0, s1, res_s + 1)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    pts = surf(T, S)  # (nt, res_s+1, 2n)

    # label[i, j] = vertex id of grid node (i mod res_t, j)
    label = -np.ones((nt, res_s + 1), dtype=np.int64)
    verts = []

    def add(p):
        verts.append(p)
        return len(verts) - 1

    for j in range(res_s + 1):
        row = pts[:, j]
        if collapse_poles and np.max(np.abs(row - row[0])) <= IDENT_TOL * max(1.0, np.abs(row).max()):
            label[:, j] = add(row[0])
            continue
        if ident == "mobius" and j == res_s:
            half = res_t // 2
            for i in range(half):
                label[i, j] = label[i + half, j] = add(row[i])
            continue
        for i in range(nt):
            label[i, j] = add(row[i])

    faces = []
    for i in range(res_t):
        ip = (i + 1) % res_t if periodic else i + 1
        for j in range(res_s):
            a, b = label[i, j], label[ip, j]
            c, d = label[i, j + 1], label[ip, j + 1]
            split = ((a, b, d), (a, d, c))
            if diagonals == "alternating" and i % 2:
                split = ((a, b, c), (b, d, c))
            for tri in split:
                if len(set(tri)) == 3:
                    faces.append(tri)
    return TriMesh(np.array(verts), np.array(faces), orientable=(ident != "mobius"))


def disk_mesh(res_t: int = 128, res_s: int = 16, radius: float = 1.0, plane=None, center=None) -> TriMesh:
    """Polar-grid mesh of a flat disk; by default the unit disk in the first complex line of C^2.

    ``plane`` is a :class:`~isoarea.ambient.TwoPlane`; boundary vertices sit
    at angles ``2 pi k / res_t`` with ``k = 0..res_t-1``.
    """
    if plane is None:
        e1, e2 = np.eye(4)[0], np.eye(4)[1]
    else:
        e1, e2 = plane.e1, plane.e2
    c = np.zeros_like(e1) if center is None else np.asarray(center, dtype=float)

    def fmap(t, s):
        r = radius * s
        return c + np.multiply.outer(r * np.cos(t), e1) + np.multiply.outer(r * np.sin(t), e2)

    chart = ParamSurface(fmap, (0.0, 2 * np.pi, 0.0, 1.0), e1.shape[0] // 2, "cylinder", name="disk")
    return triangulate(chart, res_t, res_s)


# ---------------------------------------------------------------- file formats


def write_obj(mesh: TriMesh, path) -> None:
    """Wavefront text mesh; vertices projected to their first three coordinates."""
    with open(path, "w") as fh:
        for v in mesh.vertices:
            x = list(v[:3]) + [0.0] * max(0, 3 - len(v))
            fh.write("v {:.17g} {:.17g} {:.17g}\n".format(*x))
        for f in mesh.faces:
            fh.write("f {} {} {}\n".format(*(f + 1)))


def vertex_columns(n: int) -> list[str]:
    cols = ["vertex_id"]
    for k in range(1, n + 1):
        cols += [f"x{k}", f"y{k}"]
    return cols


def write_mesh_csv(mesh: TriMesh, vertex_path, face_path) -> None:
    """Lossless CSV pair: ``vertex_id,x1,y1,...,xn,yn`` and ``v0,v1,v2``."""
    with open(vertex_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(vertex_columns(mesh.n))
        for i, v in enumerate(mesh.vertices):
            w.writerow([i] + [repr(float(x)) for x in v])
    with open(face_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v0", "v1", "v2"])
        for f in mesh.faces:
            w.writerow([int(x) for x in f])


def read_mesh_csv(vertex_path, face_path, orientable: bool = True) -> TriMesh:
    with open(vertex_path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "vertex_id" or len(header) % 2 == 0:
        raise ValueError(f"unexpected vertex header {header}")
    ids = [int(r[0]) for r in body]
    if ids != list(range(len(ids))):
        raise ValueError("vertex ids must be 0..V-1 in order")
    verts = np.array([[float(x) for x in r[1:]] for r in body])
    faces = np.loadtxt(face_path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    return TriMesh(verts, faces, orientable)
