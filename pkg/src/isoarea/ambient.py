"""Linear and symplectic algebra of C^n viewed as R^{2n}.

Vectors are real arrays in the interleaved layout ``(x1, y1, ..., xn, yn)``
so that the complex coordinate ``z_k = x_k + i y_k`` occupies the adjacent
pair ``(2k, 2k+1)``.  All functions accept stacked vectors along the leading
axes unless noted otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ORTHO_TOL",
    "TwoPlane",
    "apply_complex_structure",
    "as_vector",
    "canonical_plane",
    "complex_line_plane",
    "complexify",
    "haar_unitaries",
    "haar_unitary",
    "kahler_cosine",
    "make_rng",
    "omega_complement",
    "realify",
    "symplectic_form",
    "to_complex",
    "to_real",
    "wedge_norm",
]

ORTHO_TOL = 1e-12


def as_vector(v, n: int | None = None) -> np.ndarray:
    """Validate and return ``v`` as a finite float array of even length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] % 2:
        raise ValueError(f"expected a real vector of even length, got shape {arr.shape}")
    if n is not None and arr.shape[-1] != 2 * n:
        raise ValueError(f"expected length {2 * n}, got {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def to_complex(v) -> np.ndarray:
    """Interleaved real vector(s) -> complex vector(s) of half the length."""
    v = np.asarray(v, dtype=float)
    return v[..., 0::2] + 1j * v[..., 1::2]


def to_real(z) -> np.ndarray:
    """Complex vector(s) -> interleaved real vector(s)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def symplectic_form(u, v) -> np.ndarray | float:
    """Standard symplectic form ``sum_k dx_k ^ dy_k`` evaluated on ``(u, v)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    if u.shape[-1] % 2:
        raise ValueError("vectors must have even length")
    val = np.sum(u[..., 0::2] * v[..., 1::2] - u[..., 1::2] * v[..., 0::2], axis=-1)
    return float(val) if np.ndim(val) == 0 else val


def apply_complex_structure(v) -> np.ndarray:
    """Multiplication by ``i``: ``(x_k, y_k) -> (-y_k, x_k)``."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0::2] = -v[..., 1::2]
    out[..., 1::2] = v[..., 0::2]
    return out


def wedge_norm(vectors) -> float:
    """Norm of ``v_1 ^ ... ^ v_m``, i.e. ``sqrt(det(Gram))``.

    Parameters
    ----------
    vectors : (m, 2n) array_like
        The vectors, one per row.  Requires ``m <= 2n``.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    m, dim = vecs.shape
    if m > dim:
        raise ValueError(f"{m} vectors in dimension {dim}: wedge vanishes identically")
    gram = vecs @ vecs.T
    return float(np.sqrt(max(np.linalg.det(gram), 0.0)))


@dataclass(frozen=True)
class TwoPlane:
    """Oriented real 2-plane in C^n given by an orthonormal frame."""

    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        e1 = as_vector(self.e1)
        e2 = as_vector(self.e2, e1.shape[-1] // 2)
        if e1.ndim != 1:
            raise ValueError("frame vectors must be 1-d")
        dev = max(abs(e1 @ e1 - 1.0), abs(e2 @ e2 - 1.0), abs(e1 @ e2))
        if dev > ORTHO_TOL:
            raise ValueError(f"frame is not orthonormal (deviation {dev:.3e})")
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)

    @property
    def n(self) -> int:
        return self.e1.shape[0] // 2

    @property
    def frame(self) -> np.ndarray:
        return np.stack([self.e1, self.e2])

    @classmethod
    def from_span(cls, u, v) -> "TwoPlane":
        """Gram-Schmidt on ``(u, v)``; keeps the orientation of the pair."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        e1 = u / np.linalg.norm(u)
        w = v - (v @ e1) * e1
        nw = np.linalg.norm(w)
        if nw < 1e-14 * max(np.linalg.norm(v), 1.0):
            raise ValueError("spanning vectors are linearly dependent")
        e2 = w / nw
        # second pass keeps the 1e-12 contract for badly scaled input
        e2 = e2 - (e2 @ e1) * e1
        return cls(e1, e2 / np.linalg.norm(e2))

    def project(self, x) -> np.ndarray:
        """Orthogonal projection of point(s) onto the plane."""
        x = np.asarray(x, dtype=float)
        return np.multiply.outer(x @ self.e1, self.e1) + np.multiply.outer(x @ self.e2, self.e2)

    def transformed(self, R) -> "TwoPlane":
        """Image under a real orthogonal (e.g. realified unitary) matrix."""
        return TwoPlane(R @ self.e1, R @ self.e2)


def kahler_cosine(p: TwoPlane) -> float:
    """``|omega(e1, e2)|``: 1 on complex planes, 0 on isotropic ones."""
    if not isinstance(p, TwoPlane):
        p = TwoPlane(*p)
    return abs(symplectic_form(p.e1, p.e2))


def _unit(n: int, k: int, imag: bool = False) -> np.ndarray:
    v = np.zeros(2 * n)
    v[2 * k + int(imag)] = 1.0
    return v


def canonical_plane(a: float, n: int = 2) -> tuple[TwoPlane, TwoPlane]:
    """The pair ``P_a = span((1,0), (ia, sqrt(1-a^2)))`` and its partner.

    ``P'_a = span((0,1), (sqrt(1-a^2), ia))`` is omega-orthogonal to ``P_a``
    and has the same Kahler cosine ``a``.  Both live in the first two complex
    coordinates of C^n.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError(f"Kahler cosine parameter must lie in [0, 1), got {a}")
    if n < 2:
        raise ValueError("need n >= 2")
    b = np.sqrt(1.0 - a * a)
    z = np.zeros(n, dtype=complex)
    e1, e2, f1, f2 = (z.copy() for _ in range(4))
    e1[0] = 1.0
    e2[0], e2[1] = 1j * a, b
    f1[1] = 1.0
    f2[0], f2[1] = b, 1j * a
    P = TwoPlane(to_real(e1), to_real(e2))
    P_prime = TwoPlane(to_real(f1), to_real(f2))
    return P, P_prime


def complex_line_plane(direction) -> TwoPlane:
    """The complex line ``C * direction`` as an oriented real plane ``(d, Jd)``."""
    d = as_vector(direction)
    d = d / np.linalg.norm(d)
    return TwoPlane(d, apply_complex_structure(d))


def omega_complement(p: TwoPlane) -> TwoPlane:
    """An omega-orthogonal partner plane with the same signed value of omega.

    Only defined for C^2, where the omega-orthogonal complement of ``P`` is
    the plane ``J(P^perp)``.  The frame is oriented so that
    ``omega(f1, f2) == omega(e1, e2)``.
    """
    if p.n != 2:
        raise ValueError("omega_complement is only unique in C^2")
    basis = np.linalg.svd(p.frame)[2]
    perp = basis[2:]
    f1 = apply_complex_structure(perp[0])
    f2 = apply_complex_structure(perp[1])
    if symplectic_form(f1, f2) * symplectic_form(p.e1, p.e2) < 0:
        f2 = -f2
    return TwoPlane.from_span(f1, f2)


def make_rng(seed: int = 0, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``.

    Distinct ``stream`` values give statistically independent substreams, so
    parallel workers can draw without coordination.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def realify(U) -> np.ndarray:
    """Complex ``(..., n, n)`` matrices -> real ``(..., 2n, 2n)`` acting on interleaved vectors."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[-1]
    R = np.empty(U.shape[:-2] + (2 * n, 2 * n))
    R[..., 0::2, 0::2] = U.real
    R[..., 0::2, 1::2] = -U.imag
    R[..., 1::2, 0::2] = U.imag
    R[..., 1::2, 1::2] = U.real
    return R


def complexify(R) -> np.ndarray:
    """Inverse of :func:`realify` (assumes the input commutes with J)."""
    R = np.asarray(R, dtype=float)
    return R[..., 0::2, 0::2] + 1j * R[..., 1::2, 0::2]


def haar_unitaries(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent Haar-distributed complex unitaries, shape ``(count, n, n)``.

    Gaussian matrix, QR, then each column of ``Q`` is multiplied by the phase
    of the matching diagonal entry of ``R`` so that the factorisation has a
    positive diagonal and ``Q`` is exactly Haar.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    z = rng.standard_normal((count, n, n, 2)) @ np.array([1.0, 1j]) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    absd = np.abs(d)
    if np.any(absd == 0.0):
        # singular draw; probability zero, regenerate
        return haar_unitaries(n, count, rng)
    return q * (d / absd)[..., None, :]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar unitary on C^n as a real ``(2n, 2n)`` matrix commuting with J."""
    return realify(haar_unitaries(n, 1, rng)[0])
