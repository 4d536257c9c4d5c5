"""Numerical tolerances shared by every module.

Keep all geometric thresholds here so there is one place to audit them.
"""
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    plane: float = 1e-9          # point-to-plane distance for coplanarity / facet merging
    vertex_merge: float = 1e-10  # duplicate point merge
    feasibility: float = 1e-9    # strict interior slack for halfspace systems
    orthogonality: float = 1e-12
    boundary: float = 1e-7       # |gauge - 1| accepted as "on the boundary"
    exact_oracle: float = 1e-8   # slack floor for exact polytope oracles
    smooth_oracle: float = 1e-6  # slack floor for smooth / quadrature oracles
    approx_factor: float = 10.0  # widening applied when a polar is sampled
    report: float = 1e-8         # default bound-check tolerance (MAHLERLAB_TOL)


TOL = Tolerances()

REGULAR_SIMPLEX_PRODUCT = 64.0 / 9.0


def report_tolerance():
    """Bound-check tolerance, overridable through ``MAHLERLAB_TOL``."""
    raw = os.environ.get("MAHLERLAB_TOL")
    if raw:
        return float(raw)
    return TOL.report
