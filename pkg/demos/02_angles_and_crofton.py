"""
Haar angles and the kinematic formula
=====================================

Averaged against Haar measure on U(n), a complex line meets a fixed complex
hyperplane at twice the angle of an isotropic plane.  The same factor shows
up in intersection counts of moving disks, which we estimate by Monte-Carlo.
"""

import numpy as np

from isoarea.ambient import make_rng
from isoarea.crofton import CroftonWindow, angle_ratio, howard_lhs_estimate, howard_normalization
from isoarea.surface import disk_mesh, flat_chart, triangulate

# I_C / I_L from shared draws; the delta method gives the standard error
for n in (2, 3, 4):
    ratio, consts = angle_ratio(n, 200_000, make_rng(1, n))
    print(f"n = {n}: I_C = {consts.I_C.mean:.4f}, I_L = {consts.I_L.mean:.4f}, "
          f"ratio = {ratio.mean:.4f} +- {ratio.stderr:.4f}")

# count intersections of a randomly moved unit disk Q with a fixed body P
Q = disk_mesh(64, 2)
square = triangulate(flat_chart(np.eye(4)[0], np.eye(4)[2], (-0.5, 0.5, -0.5, 0.5)), 4, 4)
_, consts = angle_ratio(2, 200_000, make_rng(2))
for name, P, angle in (("complex disk", disk_mesh(64, 2), consts.I_C), ("Lagrangian square", square, consts.I_L)):
    window = CroftonWindow.enclosing(P, Q)
    lhs = howard_lhs_estimate(P, Q, window, 200_000, make_rng(3))
    norm = howard_normalization(lhs, P, Q, angle)
    # the normalization is the same for both bodies: the angle carries the factor 2
    print(f"{name:17s}: E[#] * vol = {lhs.mean:.4f}, normalization = {norm.mean:.4f} +- {norm.stderr:.4f}")
