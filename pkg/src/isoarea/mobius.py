"""Isotropic Mobius bands ``F(t, s) = cos(s) alpha(t) + sin(s) beta(t)``.

``alpha`` runs in a plane ``P`` and ``beta`` in an omega-orthogonal plane
``P'``; when ``omega(alpha, alpha') == omega(beta, beta')`` the band is
isotropic.  With ``beta(t + pi) == beta(t)`` the rectangle
``[0, 2pi] x [0, pi/2]`` closes up into a Mobius band whose only boundary
curve is ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ambient import TwoPlane, canonical_plane, symplectic_form
from .surface import ParamSurface

__all__ = [
    "BAND_UPPER_AREA",
    "BandSpec",
    "CurvePair",
    "band_area_bound_integrand",
    "band_from_curves",
    "band_from_spec",
    "circle_band",
    "complex_band",
    "noncomplex_band",
    "noncomplex_metric_E",
]

#: area of the complex band, 3 pi^2 / (2 sqrt 2)
BAND_UPPER_AREA = 3.0 * np.pi**2 / (2.0 * np.sqrt(2.0))

CurveFn = Callable[[np.ndarray], np.ndarray]


def _curve_derivative(fn: CurveFn, period: float) -> CurveFn:
    # fourth-order central stencil; h balances truncation against round-off
    h = 1e-4 * period

    def d(t):
        t = np.asarray(t, dtype=float)
        return (-fn(t + 2 * h) + 8 * fn(t + h) - 8 * fn(t - h) + fn(t - 2 * h)) / (12 * h)

    return d


@dataclass(frozen=True)
class CurvePair:
    """Boundary curve ``alpha`` and core curve ``beta`` of a band.

    Both callables are vectorised: ``t`` of shape ``S`` maps to ``S + (2n,)``.
    Derivatives are optional; finite differences are used when absent.
    """

    alpha: CurveFn
    beta: CurveFn
    period: float = 2 * np.pi
    half_period_symmetry: bool = True
    alpha_dot: Optional[CurveFn] = None
    beta_dot: Optional[CurveFn] = None

    def d_alpha(self) -> CurveFn:
        return self.alpha_dot or _curve_derivative(self.alpha, self.period)

    def d_beta(self) -> CurveFn:
        return self.beta_dot or _curve_derivative(self.beta, self.period)


def band_from_curves(pair: CurvePair, P: TwoPlane, P_prime: TwoPlane, *, samples: int = 512,
                     tol: float = 1e-10) -> ParamSurface:
    """Build the band over ``[0, period] x [0, pi/2]`` after checking the hypotheses.

    Raises
    ------
    ValueError
        If ``P`` and ``P'`` are not omega-orthogonal, a curve leaves its
        plane, ``beta`` lacks the claimed half-period symmetry, or
        ``omega(alpha, alpha') != omega(beta, beta')`` at some sample.
    """
    orth = max(abs(symplectic_form(u, v)) for u in P.frame for v in P_prime.frame)
    if orth > tol:
        raise ValueError(f"planes are not omega-orthogonal (residual {orth:.3e})")

    ts = np.linspace(0.0, pair.period, samples, endpoint=False)
    A = pair.alpha(ts)
    B = pair.beta(ts)
    for name, X, plane in (("alpha", A, P), ("beta", B, P_prime)):
        off = np.max(np.linalg.norm(X - plane.project(X), axis=-1))
        if off > 1e-12 * max(1.0, np.abs(X).max()):
            raise ValueError(f"{name} leaves its plane (distance {off:.3e})")
    if pair.half_period_symmetry:
        gap = np.max(np.abs(B - pair.beta(ts + 0.5 * pair.period)))
        if gap > 1e-12 * max(1.0, np.abs(B).max()):
            raise ValueError(f"beta is not half-period symmetric (gap {gap:.3e})")

    dA, dB = pair.d_alpha(), pair.d_beta()
    mismatch = np.max(np.abs(symplectic_form(A, dA(ts)) - symplectic_form(B, dB(ts))))
    if mismatch > tol:
        raise ValueError(f"curves are not compatible: |omega(a,a') - omega(b,b')| = {mismatch:.3e}")

    alpha, beta = pair.alpha, pair.beta

    def fmap(t, s):
        c, sn = np.cos(s)[..., None], np.sin(s)[..., None]
        return c * alpha(t) + sn * beta(t)

    def jac(t, s):
        t, s = np.broadcast_arrays(t, s)
        c, sn = np.cos(s)[..., None], np.sin(s)[..., None]
        return c * dA(t) + sn * dB(t), -sn * alpha(t) + c * beta(t)

    ident = "mobius" if pair.half_period_symmetry else "cylinder"
    return ParamSurface(fmap, (0.0, pair.period, 0.0, np.pi / 2), P.n, ident, jac, "band")


def circle_band(e1, e2, f1, f2, radius: float = 1.0, center=None, name: str = "band") -> ParamSurface:
    """Band over the circle ``center + r(cos t e1 + sin t e2)`` with core in ``span(f1, f2)``.

    The core curve is ``(r / sqrt 2)(cos 2t f1 + sin 2t f2)``; the caller is
    responsible for ``omega(f1, f2) == omega(e1, e2)`` and omega-orthogonality.
    The analytic jacobian is attached.
    """
    e1, e2, f1, f2 = (np.asarray(v, dtype=float) for v in (e1, e2, f1, f2))
    c0 = np.zeros_like(e1) if center is None else np.asarray(center, dtype=float)
    r = float(radius)
    k = r / np.sqrt(2.0)

    def _o(x, v):
        return np.multiply.outer(x, v)

    def fmap(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        cs, sn = np.cos(s), np.sin(s)
        return (c0 + _o(r * cs * np.cos(t), e1) + _o(r * cs * np.sin(t), e2)
                + _o(k * sn * np.cos(2 * t), f1) + _o(k * sn * np.sin(2 * t), f2))

    def jac(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        cs, sn = np.cos(s), np.sin(s)
        Ft = (_o(-r * cs * np.sin(t), e1) + _o(r * cs * np.cos(t), e2)
              + _o(-2 * k * sn * np.sin(2 * t), f1) + _o(2 * k * sn * np.cos(2 * t), f2))
        Fs = (_o(-r * sn * np.cos(t), e1) + _o(-r * sn * np.sin(t), e2)
              + _o(k * cs * np.cos(2 * t), f1) + _o(k * cs * np.sin(2 * t), f2))
        return Ft, Fs

    return ParamSurface(fmap, (0.0, 2 * np.pi, 0.0, np.pi / 2), e1.shape[0] // 2, "mobius", jac, name)


def complex_band(n: int = 2) -> ParamSurface:
    """Hamiltonian stationary band ``(cos s e^{it}, sin s e^{2it} / sqrt 2)`` in C^n."""
    if n < 2:
        raise ValueError("need n >= 2")
    I = np.eye(2 * n)
    return circle_band(I[0], I[1], I[2], I[3], name="complex_band")


def noncomplex_band(a: float, n: int = 2) -> ParamSurface:
    """Band bounding the unit circle of ``P_a``, the plane with Kahler cosine ``a``."""
    P, Pp = canonical_plane(a, n)
    return circle_band(P.e1, P.e2, Pp.e1, Pp.e2, name=f"noncomplex_band(a={a})")


def noncomplex_metric_E(a: float, t, s):
    """Closed form of ``F_t . F_t`` for :func:`noncomplex_band`."""
    t, s = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
    return (np.cos(s) ** 2 + 2 * np.sin(s) ** 2
            - 2 * np.sqrt(2 * (1 - a * a)) * np.cos(s) * np.sin(s) * np.sin(3 * t))


def band_area_bound_integrand(a: float, t, s):
    """``E / sqrt 2``, which dominates the area element of the non-complex band.

    Equals ``(1 + sin^2 s)/sqrt 2 - sin 2s sin 3t sqrt(1 - a^2)``; the second
    term integrates to zero over a period in ``t``.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError(f"a must lie in [0, 1), got {a}")
    t, s = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
    return (1 + np.sin(s) ** 2) / np.sqrt(2.0) - np.sin(2 * s) * np.sin(3 * t) * np.sqrt(1 - a * a)


@dataclass(frozen=True)
class BandSpec:
    n: int = 2
    variant: str = "complex"
    a: float = 0.0

    def __post_init__(self):
        if self.variant not in ("complex", "noncomplex"):
            raise ValueError(f"unknown band variant {self.variant!r}")
        if self.variant == "noncomplex" and not 0.0 <= self.a < 1.0:
            raise ValueError(f"a must lie in [0, 1), got {self.a}")


def band_from_spec(spec: BandSpec) -> ParamSurface:
    if spec.variant == "complex":
        return complex_band(spec.n)
    return noncomplex_band(spec.a, spec.n)
