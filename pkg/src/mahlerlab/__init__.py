"""Volume products of convex bodies with finite symmetry groups.

Exact polytope and quadrature-based smooth paths for |K||K°|, the
boundary-curve calculus behind the 64/9 lower bound for D2- and
S4-invariant bodies, the two equipartition solvers and simplex-image
equality detection.
"""
from .body import ConvexBody, Ellipsoid, Polytope, SmoothBody, ball, smooth_approx
from .constants import REGULAR_SIMPLEX_PRODUCT, TOL
from .errors import (GeometryError, InvarianceError, MahlerError, ParseError,
                     PreconditionError, SolverError)
from .groups import SymmetryGroup, group, is_invariant
from .mahler import is_simplex_image, santalo_point, verify, volume_product

__all__ = [
    "ConvexBody", "Ellipsoid", "Polytope", "SmoothBody", "ball", "smooth_approx",
    "REGULAR_SIMPLEX_PRODUCT", "TOL", "GeometryError", "InvarianceError", "MahlerError",
    "ParseError", "PreconditionError", "SolverError", "SymmetryGroup", "group",
    "is_invariant", "is_simplex_image", "santalo_point", "verify", "volume_product",
]
__version__ = "0.1.0"
