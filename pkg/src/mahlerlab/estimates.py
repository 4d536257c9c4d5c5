"""Inequality oracles.

Every oracle returns an EstimateReport holding both sides of its
inequality; nothing here asserts, so the same reports feed property tests
and command-line diagnostics.
"""
from dataclasses import dataclass, field

import numpy as np

from . import curves
from .constants import TOL
from .errors import PreconditionError
from .planar import Plane, cross_section, polar_polygon
from .hull import fan_area, polygon_arc


@dataclass
class EstimateReport:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    inputs: dict = field(default_factory=dict)
    approximate: bool = False

    @property
    def slack(self):
        return self.lhs - self.rhs

    @property
    def passed(self):
        return self.slack >= -self.tolerance

    def as_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "tolerance": self.tolerance, "approximate": self.approximate,
                "passed": self.passed, "inputs": _plain(self.inputs)}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _tolerance(K, approximate=False):
    tol = TOL.exact_oracle if K is None or (K.is_polytope and not K.approximate) \
        else TOL.smooth_oracle
    return tol * (TOL.approx_factor if approximate or (K is not None and K.approximate) else 1)


def _require_boundary(K, *points, tol=TOL.boundary):
    for x in points:
        if abs(K.gauge(x) - 1.0) > tol:
            raise PreconditionError(f"point {np.round(x, 12).tolist()} is not on the boundary")


def pairing_2d(L_area, Lpolar_area, a, b, a0, b0, tol=TOL.exact_oracle):
    """|L| |L°| against (1/4)(a - b).(a° - b°) in the plane."""
    a, b, a0, b0 = (np.asarray(v, dtype=float) for v in (a, b, a0, b0))
    if np.allclose(a, b, rtol=0, atol=1e-15):
        raise PreconditionError("arc endpoints must differ")
    return EstimateReport("pairing_2d", float(L_area) * float(Lpolar_area),
                          0.25 * float(np.dot(a - b, a0 - b0)), tol,
                          {"a": a, "b": b, "a_polar": a0, "b_polar": b0})


def pairing_curve(K, a, b):
    """Cbar(C(a,b)) . Cbar(Lambda C(a,b)) against (1/4)(a - b).(Lambda a - Lambda b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if K.is_polytope:
        raise PreconditionError("the curve pairing needs a smooth body")
    _require_boundary(K, a, b)
    lhs = float(np.dot(curves.radial_cbar(K, a, b), curves.lambda_cbar(K, a, b)))
    rhs = 0.25 * float(np.dot(a - b, K.gradient(a) - K.gradient(b)))
    return EstimateReport("pairing_curve", lhs, rhs, _tolerance(K), {"a": a, "b": b})


def surface_estimate(K, generators, polar_generators=None):
    """|o*S_K(C)| |o*S_K°(C°)| against (1/9) Cbar(C) . Cbar(C°).

    Without polar generators the polar curve is Lambda(C) (smooth bodies);
    with them it is the radial curve of K° through the polar generators.
    Generators are put in positive cyclic order first.
    """
    U, _ = curves._ordered_cone(generators)
    if polar_generators is None:
        if K.is_polytope:
            raise PreconditionError("Lambda(C) needs a smooth body; pass polar generators")
        lhs = curves.cone_region_volume(K, U) * curves.polar_patch_volume(K, U)
        rhs = float(np.dot(curves.radial_cbar_closed(K, U), curves.lambda_cbar_closed(K, U))) / 9
        return EstimateReport("surface_estimate", lhs, rhs, _tolerance(K),
                              {"generators": U, "mode": "lambda"})
    V, _ = curves._ordered_cone(polar_generators)
    Kp = K.polar()
    lhs = curves.cone_region_volume(K, U) * curves.cone_region_volume(Kp, V)
    rhs = float(np.dot(curves.radial_cbar_closed(K, U), curves.radial_cbar_closed(Kp, V))) / 9
    return EstimateReport("surface_estimate", lhs, rhs, _tolerance(Kp),
                          {"generators": U, "polar_generators": V, "mode": "polygonal"},
                          approximate=Kp.approximate)


def _on_polar_boundary(K, y, tol):
    return abs(K.support(y) - 1.0) <= tol


def cone_pair_2d(K, a, b, a0, b0, tol=TOL.boundary):
    """|o*C_K(a,b)| |o*C_K°(H; a°, b°)| against (1/4)(2 - a.b° - a°.b), H = span{a, b}."""
    a, b, a0, b0 = (np.asarray(v, dtype=float) for v in (a, b, a0, b0))
    _require_boundary(K, a, b)
    if not (_on_polar_boundary(K, a0, tol) and _on_polar_boundary(K, b0, tol)):
        raise PreconditionError("polar points are not on the boundary of the polar body")
    if abs(a @ a0 - 1) > tol or abs(b @ b0 - 1) > tol:
        raise PreconditionError("pairings a.a° = b.b° = 1 fail")
    if not (a @ b0 < 1 and b @ a0 < 1):
        raise PreconditionError("need a.b° < 1 and b.a° < 1")
    H = Plane.spanned(a, b)
    L = curves.sector_area(K, a, b)
    approximate = False
    if K.is_polytope:
        Lp, exact = curves.projected_arc_area(K.polar(), H, a0, b0)
        approximate = not exact
        route = "projection"
    elif np.allclose(K.gradient(a), a0, atol=1e-9) and np.allclose(K.gradient(b), b0, atol=1e-9):
        # Pi_H(K°) = (K n H)° and Pi_H o Lambda_K = Lambda_{K n H}: the arc is Pi_H Lambda(C)
        Lp = float(np.dot(curves.lambda_cbar(K, a, b), H.normal))
        route = "duality"
    else:
        sec = cross_section(K, H)
        Lp = fan_area(polygon_arc(polar_polygon(sec.polygon), H.coords(a0), H.coords(b0)))
        approximate = True
        route = "sampled-section"
    rhs = 0.25 * (2.0 - float(a @ b0) - float(a0 @ b))
    return EstimateReport("cone_pair_2d", L * Lp, rhs, _tolerance(K, approximate),
                          {"a": a, "b": b, "a_polar": a0, "b_polar": b0, "route": route},
                          approximate=approximate)


def section_pairing(K, a, b, a0=None, b0=None):
    """The planar pairing on the section L = K n span{a, b} with arc o * C_K(a, b).

    Polar points default to Pi_H(Lambda a), Pi_H(Lambda b), which lie on the
    boundary of L° = Pi_H(K°).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_boundary(K, a, b)
    H = Plane.spanned(a, b)
    pa0 = H.coords(K.lambda_map(a) if a0 is None else a0)
    pb0 = H.coords(K.lambda_map(b) if b0 is None else b0)
    L = curves.sector_area(K, a, b)
    approximate = False
    if not K.is_polytope and a0 is None and b0 is None:
        Lp = float(np.dot(curves.lambda_cbar(K, a, b), H.normal))
    else:
        sec = cross_section(K, H)
        Lp = fan_area(polygon_arc(polar_polygon(sec.polygon), pa0, pb0))
        approximate = not sec.exact
    rep = pairing_2d(L, Lp, H.coords(a), H.coords(b), pa0, pb0,
                     tol=_tolerance(K, approximate))
    rep.approximate = approximate
    if K.is_polytope and a0 is None and b0 is None:
        # Lambda on a polytope is our lowest-index-facet rule, not a smooth map
        rep.inputs["polar_rule"] = "polytope lowest-index facet"
    return rep
