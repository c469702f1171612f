"""
Bracketing the least isotropic filling area
===========================================

Start from the triangulated band and minimize area over discrete isotropic
Mobius bands with the same boundary.  The result sits between the proved
lower bound 3 and the band value 3 pi / (2 sqrt 2); refining the mesh and
extrapolating shows how much of the remaining excess is discretisation.

Pass ``--fine`` to add the 128 x 32 mesh (a few minutes on one core).
"""

import sys

from isoarea.optimize import UPPER_RATIO, IsotropicOptProblem, estimate_lambda, minimize
from isoarea.surface import write_obj

resolutions = [(32, 8), (64, 16)]
if "--fine" in sys.argv:
    resolutions.append((128, 32))

out = estimate_lambda(resolutions=resolutions, seed=0)
for row in out["rows"]:
    m, r = row["resolution"]
    print(f"{m:4d} x {r:3d}: area/pi = {row['area_ratio']:.6f}, residual {row['residual']:.1e}, "
          f"converged {row['converged']}")
print(f"Richardson (h^2) estimate: {out['richardson']:.6f}  vs band value {UPPER_RATIO:.6f}")
print("bracket:", out["bracket"])

# a tilted boundary plane admits much smaller fillings
rep = minimize(IsotropicOptProblem.circle(32, plane_a=0.5, resolution=8), seed=0)
print(f"a = 0.5 boundary plane: area/pi = {rep.area_ratio:.4f}")

write_obj(out["rows"][-1]["report"].mesh, "lambda_mesh.obj")
print("wrote lambda_mesh.obj")
