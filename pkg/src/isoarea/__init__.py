"""Isotropic surfaces of least area in complex space.

Modules
-------
ambient
    Real model of C^n, symplectic form, two-planes, Haar unitaries.
surface
    Parametric surfaces, quadrature, isotropy residuals, triangle meshes.
mobius
    Isotropic Mobius bands built from a boundary circle and a core curve.
lagrangian
    Lagrangian angle, mean curvature form and Hamiltonian stationarity.
crofton
    Haar-averaged angles, Crofton counts and projection functionals.
optimize
    Area minimisation over discrete isotropic meshes.
"""

__version__ = "0.1.0"

from . import ambient, crofton, lagrangian, mobius, optimize, surface  # noqa: E402

__all__ = ["__version__", "ambient", "crofton", "lagrangian", "mobius", "optimize", "surface"]
