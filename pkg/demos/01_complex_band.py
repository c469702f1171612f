"""
The isotropic Mobius band over the unit circle
==============================================

The band ``F(t, s) = (cos s e^{it}, sin s e^{2it} / sqrt 2)`` is isotropic,
bounds the unit circle of the first complex line, and has area
``3 pi^2 / (2 sqrt 2)``.  This script checks its metric, its area, its
Lagrangian angle and the strict inequality for tilted boundary planes.
"""

import numpy as np

from isoarea.lagrangian import hamiltonian_stationary_residual, lagrangian_angle, mean_curvature_form
from isoarea.mobius import BAND_UPPER_AREA, complex_band, noncomplex_band
from isoarea.surface import QuadratureSpec, area, first_fundamental_form, isotropy_residual

band = complex_band()

# the metric is conformal up to a factor 2: E = 1 + sin^2 s, F = 0, G = E / 2
t, s = np.meshgrid(np.linspace(0, 2 * np.pi, 5), np.linspace(0, np.pi / 2, 4), indexing="ij")
E, F, G = first_fundamental_form(band, t, s)
print("E - (1 + sin^2 s):", np.abs(E - 1 - np.sin(s) ** 2).max())
print("F:", np.abs(F).max(), " G - E/2:", np.abs(G - E / 2).max())

# Gauss-Legendre converges spectrally on this smooth integrand
for nodes in (8, 16, 32, 64):
    print(f"area with {nodes:2d}^2 nodes: {area(band, QuadratureSpec(nodes, nodes)):.15f}")
print(f"closed form            : {BAND_UPPER_AREA:.15f}")
print("isotropy residual:", isotropy_residual(band))

# the Lagrangian angle grows like 3t, so sigma = 3 dt and *sigma = 3/sqrt(2) ds
theta = lagrangian_angle(band)
print("theta(1, 0.3) - theta(0, 0.3) =", theta(1.0, 0.3) - theta(0.0, 0.3))
p, q = mean_curvature_form(band)(np.array([0.7]), np.array([0.4]))
print("sigma at (0.7, 0.4):", p[0], q[0])
print("max |d * sigma| on a 128x32 grid:", hamiltonian_stationary_residual(band, (128, 32)))

# tilting the boundary plane away from a complex line strictly lowers the area
for a in (0.99, 0.75, 0.5, 0.25, 0.0):
    print(f"a = {a:4.2f}: area / pi = {area(noncomplex_band(a)) / np.pi:.6f}")
print(f"complex line: area / pi = {BAND_UPPER_AREA / np.pi:.6f}")
