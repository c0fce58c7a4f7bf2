"""Numerical laboratory for non-autonomous Blaschke dynamics and polynomial models.

Modules
-------
disk_geometry   hyperbolic metric on the unit disk, uniform Schwarz bounds
blaschke        normalized Blaschke products, critical points, preimage domains
blaschke_seq    sequences, hyperbolicity certificates, contraction rates
qc_numerics     dilatation estimates, Beurling-Ahlfors extension, gluing maps
poly_dynamics   Green function, Böttcher coordinates, grand orbits
riemann         zipper Riemann maps and band charts
model_builder   Blaschke models of polynomials, template functions
cli             the ``wandering-lab`` command
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: E402

__all__ = ["__version__", "KERNEL_BACKEND"]
