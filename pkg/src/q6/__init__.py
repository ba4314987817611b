"""Delaunay-type solutions of the sixth-order constant Q-curvature equation on the cylinder."""
from q6.constants import DimensionalConstants, build_constants, sphere_eigendata
from q6.delaunay import DelaunayOrbit, Tolerances, continue_family, shoot_delaunay, shoot_period
from q6.spectral import cylinder_indicial, mode_operator, monodromy, morse_index_periodic
from q6.bifurcation import count_solutions, sphere_reference, theorem1_diagnostics, yamabe_quotient_radial

__version__ = "0.1.0"

__all__ = [
    "DimensionalConstants", "build_constants", "sphere_eigendata",
    "DelaunayOrbit", "Tolerances", "continue_family", "shoot_delaunay", "shoot_period",
    "cylinder_indicial", "mode_operator", "monodromy", "morse_index_periodic",
    "count_solutions", "sphere_reference", "theorem1_diagnostics", "yamabe_quotient_radial",
]
