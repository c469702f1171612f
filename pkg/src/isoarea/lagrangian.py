"""Lagrangian angle, mean curvature form and Hamiltonian stationarity in C^2.

On a Lagrangian surface ``dz1 ^ dz2`` restricts to ``e^{i theta} vol``; the
mean curvature 1-form is ``sigma = d theta`` and the surface is Hamiltonian
stationary when ``*sigma`` is closed.  Everything here is evaluated in the
``(t, s)`` chart of a :class:`~isoarea.surface.ParamSurface`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import to_complex
from .surface import ParamSurface, QuadratureSpec, derivatives, first_fundamental_form, isotropy_residual

__all__ = [
    "AngleField",
    "OneForm",
    "closedness_residual",
    "first_variation_pairing",
    "hamiltonian_stationary_residual",
    "hodge_star",
    "holomorphic_volume",
    "lagrangian_angle",
    "lagrangian_graph",
    "mean_curvature_form",
]

LAGRANGIAN_TOL = 1e-8
JUMP_LIMIT = np.pi / 2


def holomorphic_volume(surf: ParamSurface, t, s, *, numeric: bool = False) -> np.ndarray:
    """``dz1 ^ dz2 (F_t, F_s)`` as complex numbers."""
    Ft, Fs = derivatives(surf, t, s, numeric=numeric)
    a, b = to_complex(Ft), to_complex(Fs)
    return a[..., 0] * b[..., 1] - b[..., 0] * a[..., 1]


def _require_lagrangian(surf: ParamSurface, numeric: bool):
    if surf.n != 2:
        raise ValueError(f"Lagrangian angle needs n = 2, got n = {surf.n}")
    res = isotropy_residual(surf, QuadratureSpec(32, 32), numeric=numeric)
    if res > LAGRANGIAN_TOL:
        raise ValueError(f"surface is not Lagrangian (isotropy residual {res:.3e})")


@dataclass(frozen=True)
class AngleField:
    """Continuous branch of the Lagrangian angle, pinned at a base point."""

    surface: ParamSurface
    base_point: tuple = None
    base_value: float = 0.0
    numeric: bool = False

    def __post_init__(self):
        if self.base_point is None:
            t0, _, s0, _ = self.surface.domain
            object.__setattr__(self, "base_point", (t0, s0))

    def phase(self, t, s) -> np.ndarray:
        """``e^{i theta}`` (unit modulus)."""
        w = holomorphic_volume(self.surface, t, s, numeric=self.numeric)
        aw = np.abs(w)
        if np.any(aw == 0.0):
            idx = np.unravel_index(np.argmin(aw), np.shape(aw))
            raise FloatingPointError(f"vanishing area element at grid index {idx}")
        return w / aw

    def on_grid(self, ts, ss) -> np.ndarray:
        """Unwrapped angle on the tensor grid ``ts x ss``.

        The branch is fixed at the grid node closest to the base point and
        continued along the ``s`` column through it, then along each ``t`` row.
        """
        ts, ss = np.asarray(ts, dtype=float), np.asarray(ss, dtype=float)
        T, S = np.meshgrid(ts, ss, indexing="ij")
        raw = np.angle(self.phase(T, S))
        i0 = int(np.argmin(np.abs(ts - self.base_point[0])))
        j0 = int(np.argmin(np.abs(ss - self.base_point[1])))
        col = np.unwrap(raw[i0, :])
        theta = np.empty_like(raw)
        for j in range(len(ss)):
            row = np.unwrap(raw[:, j])
            theta[:, j] = row - row[i0] + col[j]
        jumps = max(np.max(np.abs(np.diff(theta, axis=0)), initial=0.0),
                    np.max(np.abs(np.diff(theta, axis=1)), initial=0.0))
        if jumps > JUMP_LIMIT:
            raise ValueError(f"angle jumps by {jumps:.3f} between grid nodes; refine the grid")
        return theta + (self(ts[i0], ss[j0]) - theta[i0, j0])

    def __call__(self, t, s, steps: int = 256) -> float:
        """Angle at one point, continued along the straight path from the base point."""
        tb, sb = self.base_point
        u = np.linspace(0.0, 1.0, steps + 1)
        raw = np.angle(self.phase(tb + u * (t - tb), sb + u * (s - sb)))
        path = np.unwrap(raw)
        return float(self.base_value + path[-1] - path[0])


def lagrangian_angle(surf: ParamSurface, base_point=None, base_value: float = 0.0, *,
                     numeric: bool = False, check_modulus: bool = True) -> AngleField:
    """Lagrangian angle of a surface in C^2.

    Raises ``ValueError`` when the surface is not Lagrangian or when
    ``|dz1 ^ dz2|`` departs from the area element by more than 1e-8.
    """
    _require_lagrangian(surf, numeric)
    if check_modulus:
        T, S, _ = QuadratureSpec(16, 16).nodes(surf.domain)
        w = holomorphic_volume(surf, T, S, numeric=numeric)
        E, F, G = first_fundamental_form(surf, T, S, numeric=numeric)
        dev = np.max(np.abs(np.abs(w) - np.sqrt(np.maximum(E * G - F * F, 0.0))))
        if dev > 1e-8:
            raise ValueError(f"|dz1^dz2| differs from the area element by {dev:.3e}")
    return AngleField(surf, base_point, base_value, numeric)


@dataclass(frozen=True)
class OneForm:
    """``comp_t dt + comp_s ds`` with vectorised component functions."""

    comp_t: Callable
    comp_s: Callable

    def __call__(self, t, s):
        return np.asarray(self.comp_t(t, s), dtype=float), np.asarray(self.comp_s(t, s), dtype=float)


def _clip_step(x, lo, hi, h):
    # shift stencils inward so they stay inside the chart
    return np.clip(x, lo + h, hi - h)


def mean_curvature_form(surf: ParamSurface, *, numeric: bool = False, rel_step: float = 1e-5) -> OneForm:
    """``sigma = d theta`` by central differences of the unwrapped angle.

    Each difference ``theta(x + h) - theta(x - h)`` is taken as the argument
    of the phase ratio, which is exactly the unwrapped difference for
    ``|h theta'| < pi``.
    """
    _require_lagrangian(surf, numeric)
    field = AngleField(surf, numeric=numeric)
    t0, t1, s0, s1 = surf.domain
    ht, hs = rel_step * (t1 - t0), rel_step * (s1 - s0)

    def comp_t(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        tc = _clip_step(t, t0, t1, ht)
        return np.angle(field.phase(tc + ht, s) * np.conj(field.phase(tc - ht, s))) / (2 * ht)

    def comp_s(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        sc = _clip_step(s, s0, s1, hs)
        return np.angle(field.phase(t, sc + hs) * np.conj(field.phase(t, sc - hs))) / (2 * hs)

    return OneForm(comp_t, comp_s)


def hodge_star(surf: ParamSurface, form: OneForm, *, numeric: bool = False) -> OneForm:
    """Hodge star of a 1-form for the induced metric, orientation ``dt ^ ds``.

    With raised components ``v = g^{-1}(p, q)``, ``*(p dt + q ds) =
    sqrt(det g) (v^t ds - v^s dt)``; for ``F = 0`` this is
    ``-q sqrt(E/G) dt + p sqrt(G/E) ds``.
    """

    def star(t, s):
        p, q = form(t, s)
        E, F, G = first_fundamental_form(surf, t, s, numeric=numeric)
        det = E * G - F * F
        if np.any(det <= 0.0):
            raise ValueError("degenerate metric")
        vt = (G * p - F * q) / det
        vs = (-F * p + E * q) / det
        root = np.sqrt(det)
        return -root * vs, root * vt

    return OneForm(lambda t, s: star(t, s)[0], lambda t, s: star(t, s)[1])


def _grid(surf: ParamSurface, res):
    res_t, res_s = res
    t0, t1, s0, s1 = surf.domain
    return np.linspace(t0, t1, res_t + 1), np.linspace(s0, s1, res_s + 1)


def closedness_residual(form: OneForm, domain, res=(128, 32)) -> float:
    """Max over grid cells of ``|d(form)|``, via circulation around each cell / cell area.

    Edges are integrated with the trapezoid rule on node values.
    """
    res_t, res_s = res
    t0, t1, s0, s1 = domain
    ts, ss = np.linspace(t0, t1, res_t + 1), np.linspace(s0, s1, res_s + 1)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    p, q = form(T, S)
    dt, ds = np.diff(ts)[:, None], np.diff(ss)[None, :]
    bottom = 0.5 * (p[:-1, :-1] + p[1:, :-1]) * dt
    top = 0.5 * (p[:-1, 1:] + p[1:, 1:]) * dt
    left = 0.5 * (q[:-1, :-1] + q[:-1, 1:]) * ds
    right = 0.5 * (q[1:, :-1] + q[1:, 1:]) * ds
    curl = (bottom + right - top - left) / (dt * ds)
    return float(np.max(np.abs(curl)))


def hamiltonian_stationary_residual(surf: ParamSurface, res=(128, 32), *, numeric: bool = False) -> float:
    """``max |d(*sigma)|`` over the cells of a uniform ``res_t x res_s`` grid."""
    sigma = mean_curvature_form(surf, numeric=numeric)
    return closedness_residual(hodge_star(surf, sigma, numeric=numeric), surf.domain, res)


def first_variation_pairing(surf: ParamSurface, f_grad: Callable, quad: QuadratureSpec = QuadratureSpec(),
                            *, numeric: bool = False) -> tuple[float, float]:
    """``(int df ^ *sigma, int |df|)`` over the chart, by Gauss-Legendre quadrature.

    ``f_grad(t, s)`` returns ``(f_t, f_s)``.  On a Hamiltonian stationary
    surface the first number vanishes for every ``f`` that is a genuine
    function on the band and vanishes on its boundary.
    """
    star = hodge_star(surf, mean_curvature_form(surf, numeric=numeric), numeric=numeric)
    T, S, W = quad.nodes(surf.domain)
    ft, fs = f_grad(T, S)
    a, b = star(T, S)
    pairing = float(np.sum(W * (ft * b - fs * a)))
    size = float(np.sum(W * (np.abs(ft) + np.abs(fs))))
    return pairing, size


def lagrangian_graph(potential_grad: Callable, potential_hess: Callable, eps: float = 1.0,
                     domain=(-1.0, 1.0, -1.0, 1.0)) -> ParamSurface:
    """Graph ``x -> x + i eps grad f(x)`` over a square, a Lagrangian surface in C^2.

    This is the image of the real plane under the time-``eps`` flow of the
    Hamiltonian ``-f(x)``.  ``potential_grad(t, s)`` returns ``(f_1, f_2)`` and
    ``potential_hess(t, s)`` returns ``(f_11, f_12, f_22)``.
    """

    def fmap(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        g1, g2 = potential_grad(t, s)
        return np.stack([t, eps * g1, s, eps * g2], axis=-1)

    def jac(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        h11, h12, h22 = potential_hess(t, s)
        one, zero = np.ones_like(t), np.zeros_like(t)
        return (np.stack([one, eps * h11, zero, eps * h12], axis=-1),
                np.stack([zero, eps * h12, one, eps * h22], axis=-1))

    return ParamSurface(fmap, domain, 2, "none", jac, "lagrangian_graph")
