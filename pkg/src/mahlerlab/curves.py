"""Oriented boundary curves, the vector Cbar = (1/2) int r x dr, sector areas
and cone volumes.

For the radial curve r(t) = w(t) / mu(w(t)) with w(t) = (1-t) a + t b one has
r x r' = (a x b) / mu(w)^2, so

    Cbar(C_K(a, b)) = (1/2) (a x b) int_0^1 mu(w(t))^-2 dt.

For a polytope mu is piecewise linear in t, and on a piece where it runs
from mu0 to mu1 the integral is (t1 - t0) / (mu0 mu1): the formula is exact.
For smooth bodies the integrals are taken in the angle theta along the
arc instead, where the integrand rho^2 stays bounded even when a and b are
nearly antipodal: the sector area is (1/2) int rho(u(theta))^2 dtheta and
the Lambda-image curve y = grad mu(u(theta)) has
Cbar = (1/2) int grad mu(u) x Hess mu(u) u'(theta) dtheta.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import GeometryError, PreconditionError
from .hull import fan_area, polygon_arc
from .planar import projection
from .quadrature import integrate

DEFAULT_SAMPLES = 1024
SOURCES = ("radial-curve", "lambda-image", "projected-boundary", "explicit-segments")


@dataclass(frozen=True, eq=False)
class Polyline:
    points: np.ndarray
    closed: bool = False
    source: str = "explicit-segments"

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 3 or len(P) < 2:
            raise ValueError("a polyline needs at least two 3D points")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        object.__setattr__(self, "points", P)

    def reversed(self):
        return Polyline(self.points[::-1].copy(), self.closed, self.source)

    def __add__(self, other):
        """Concatenation; the shared endpoint is kept once."""
        P = other.points
        if np.allclose(P[0], self.points[-1], atol=1e-12, rtol=0):
            P = P[1:]
        return Polyline(np.vstack([self.points, P]), False, self.source)

    def transformed(self, g):
        return Polyline(self.points @ np.asarray(g, dtype=float).T, self.closed, self.source)


def cbar(C):
    """(1/2) sum of p_i x p_{i+1}, each component summed with math.fsum."""
    P = C.points
    Q = np.vstack([P, P[:1]]) if C.closed else P
    cr = np.cross(Q[:-1], Q[1:])
    return np.array([0.5 * math.fsum(cr[:, k]) for k in range(3)])


def signed_cone_volume(x, C):
    return float(np.dot(np.asarray(x, dtype=float), cbar(C))) / 3.0


def _check_pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.linalg.norm(a) == 0 or np.linalg.norm(b) == 0:
        raise GeometryError("curve endpoints must be nonzero")
    if np.linalg.norm(np.cross(a, b)) <= 1e-13 * np.linalg.norm(a) * np.linalg.norm(b):
        raise GeometryError("curve endpoints are parallel")
    return a, b


def polytope_breakpoints(K, a, b):
    """Parameters in [0, 1] where the facet attaining mu(w(t)) changes, with the facets."""
    D = K.dual_points
    alpha = D @ a
    beta = D @ (b - a)
    scale = max(1.0, float(np.max(np.abs(alpha))), float(np.max(np.abs(beta))))
    cur = int(np.lexsort((-beta, -alpha))[0])
    ts, faces = [0.0], [cur]
    t = 0.0
    for _ in range(len(D) + 1):
        steeper = beta > beta[cur] + 1e-15 * scale
        if not np.any(steeper):
            break
        cross = np.full(len(D), np.inf)
        cross[steeper] = (alpha[cur] - alpha[steeper]) / (beta[steeper] - beta[cur])
        cross[cross <= t + 1e-15] = np.inf
        tn = float(cross.min())
        if tn >= 1.0:
            break
        cand = np.flatnonzero(cross <= tn + 1e-15)
        cur = int(cand[np.argmax(beta[cand])])
        t = tn
        ts.append(t)
        faces.append(cur)
    ts.append(1.0)
    return np.array(ts), faces


def _arc_frame(a, b):
    """Orthonormal e1, e2 with a along e1, b in the upper half plane, and the angle a o b."""
    e1 = a / np.linalg.norm(a)
    n = np.cross(a, b)
    n /= np.linalg.norm(n)
    return e1, np.cross(n, e1), math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b))


def _arc_points(e1, e2, th):
    return np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2


def radial_integral(K, a, b, rtol=1e-13):
    """int_0^1 mu_K((1-t) a + t b)^-2 dt."""
    a, b = _check_pair(a, b)
    if K.is_polytope:
        ts, _ = polytope_breakpoints(K, a, b)
        W = (1 - ts)[:, None] * a + ts[:, None] * b
        mu = K.gauge(W)
        return math.fsum(np.diff(ts) / (mu[:-1] * mu[1:]))
    e1, e2, angle = _arc_frame(a, b)
    area2 = float(integrate(lambda th: K.gauge(_arc_points(e1, e2, th)) ** -2,
                            0.0, angle, rtol=rtol))
    return area2 / float(np.linalg.norm(np.cross(a, b)))


def radial_cbar(K, a, b):
    """Cbar of C_K(a, b) from the closed-form integral."""
    a, b = _check_pair(a, b)
    return 0.5 * np.cross(a, b) * radial_integral(K, a, b)


def sector_area(K, a, b):
    """Area of o * C_K(a, b)."""
    a, b = _check_pair(a, b)
    return 0.5 * float(np.linalg.norm(np.cross(a, b))) * radial_integral(K, a, b)


def radial_curve(K, a, b, n=DEFAULT_SAMPLES):
    """n + 1 uniform samples of C_K(a, b), plus exact facet crossings for polytopes."""
    a, b = _check_pair(a, b)
    t = np.linspace(0.0, 1.0, n + 1)
    if K.is_polytope:
        ts, _ = polytope_breakpoints(K, a, b)
        t = np.unique(np.concatenate([t, ts]))
    W = (1 - t)[:, None] * a + t[:, None] * b
    P = W / K.gauge(W)[:, None]
    keep = np.concatenate([[True], np.linalg.norm(np.diff(P, axis=0), axis=1) >= 1e-12])
    return Polyline(P[keep], False, "radial-curve")


def closed_radial_curve(K, gens, n=DEFAULT_SAMPLES):
    pieces = [radial_curve(K, gens[i], gens[(i + 1) % len(gens)], n) for i in range(len(gens))]
    C = pieces[0]
    for piece in pieces[1:]:
        C = C + piece
    return Polyline(C.points[:-1], True, "radial-curve")


def radial_cbar_closed(K, gens):
    return sum(radial_cbar(K, gens[i], gens[(i + 1) % len(gens)]) for i in range(len(gens)))


def lambda_image(K, C, tol=1e-7):
    if K.is_polytope:
        raise PreconditionError("Lambda images are defined for smooth bodies only")
    if np.any(np.abs(K.gauge(C.points) - 1.0) > tol):
        raise PreconditionError("curve is not on the boundary")
    return Polyline(K.gradient(C.points), C.closed, "lambda-image")


def lambda_cbar(K, a, b, rtol=None):
    """Cbar of Lambda(C_K(a, b)) for a smooth body."""
    if K.is_polytope:
        raise PreconditionError("Lambda images are defined for smooth bodies only")
    a, b = _check_pair(a, b)
    e1, e2, angle = _arc_frame(a, b)

    def f(th):
        U = _arc_points(e1, e2, th)
        dU = -np.sin(th)[:, None] * e1 + np.cos(th)[:, None] * e2
        return np.cross(K.gradient(U), np.einsum("nij,nj->ni", K.hessian(U), dU))

    return 0.5 * np.asarray(integrate(f, 0.0, angle, rtol=rtol or K.quad_rtol, atol=1e-15))


def lambda_cbar_closed(K, gens):
    return sum(lambda_cbar(K, gens[i], gens[(i + 1) % len(gens)]) for i in range(len(gens)))


def projected_arc(K, plane, a0, b0, n=None):
    """Counterclockwise arc of the boundary of Pi_H(K) between the rays through Pi a0, Pi b0."""
    from .planar import DEFAULT_ANGLES
    pa = plane.coords(a0)
    pb = plane.coords(b0)
    if np.linalg.norm(pa) < 1e-14 or np.linalg.norm(pb) < 1e-14:
        raise GeometryError("degenerate projection of an arc endpoint")
    cr = pa[0] * pb[1] - pa[1] * pb[0]
    if abs(cr) <= 1e-14 * np.linalg.norm(pa) * np.linalg.norm(pb) and np.dot(pa, pb) > 0:
        raise GeometryError("projected endpoints are positively proportional")
    region = projection(K, plane, n or DEFAULT_ANGLES)
    arc = polygon_arc(region.polygon, pa, pb)
    return Polyline(plane.lift(arc), False, "projected-boundary"), region.exact


def projected_arc_area(K, plane, a0, b0, n=None):
    """Area of o * C_K(H; a0, b0) (may exceed a half-plane sector)."""
    C, exact = projected_arc(K, plane, a0, b0, n)
    return fan_area(plane.coords(C.points)), exact


def projection_section_gap(K, a, b):
    """Area of o * C_K(H; a, b) minus the sector area of o * C_K(a, b), H = span{a, b}.

    The projected arc bounds Pi_H(K), which contains K n H, so the gap is
    nonnegative; it vanishes when the section and the projection agree
    along the arc.
    """
    from .planar import Plane
    a, b = _check_pair(a, b)
    H = Plane.spanned(a, b)
    area, exact = projected_arc_area(K, H, a, b)
    return area - sector_area(K, a, b), exact


# ------------------------------------------------------------------ cones

def _is_pointed(U):
    """Whether some w has w . u > 0 for every row u (an LP on the dual cone)."""
    k = len(U)
    res = linprog(np.r_[np.zeros(3), -1.0], A_ub=np.hstack([-U, np.ones((k, 1))]),
                  b_ub=np.zeros(k), bounds=[(-1, 1)] * 3 + [(None, 1)], method="highs")
    return res.status == 0 and -res.fun > 1e-12


def _ordered_cone(dirs):
    """Unit generators of a convex cone in counterclockwise order (seen from outside)
    and an interior axis."""
    D = np.asarray(dirs, dtype=float)
    if D.ndim != 2 or D.shape[1] != 3 or len(D) < 3:
        raise GeometryError("a solid cone needs at least three directions")
    U = D / np.linalg.norm(D, axis=1)[:, None]
    if not _is_pointed(U):
        raise GeometryError("directions do not span a pointed cone")
    axis = U.sum(axis=0)
    dets = np.array([np.linalg.det(np.array([U[i], U[(i + 1) % len(U)], axis]))
                     for i in range(len(U))])
    if np.all(dets < 0):
        U = U[::-1]
        dets = -dets[::-1]
    if not np.all(dets > 1e-14):
        raise GeometryError("cone generators are not in cyclic order")
    # the volume routines cut the cone by the planes of consecutive pairs
    k = len(U)
    turns = [np.linalg.det(U[[i, (i + 1) % k, (i + 2) % k]]) for i in range(k)]
    if min(turns) < -1e-14:
        raise GeometryError("cone generators do not span a convex cone")
    return U, axis / np.linalg.norm(axis)


def cone_triangles(dirs):
    U, _ = _ordered_cone(dirs)
    return np.array([[U[0], U[i], U[i + 1]] for i in range(1, len(U) - 1)])


def cone_region_volume(K, dirs, rtol=None):
    """Volume of K intersected with pos(dirs)."""
    U, axis = _ordered_cone(dirs)
    if K.is_polytope:
        from .hull import halfspace_intersection, volume
        planes = np.array([-np.cross(U[i], U[(i + 1) % len(U)]) for i in range(len(U))])
        N = np.vstack([K.normals, planes])
        c = np.concatenate([K.offsets, np.zeros(len(planes))])
        z = 0.5 * K.boundary_point(axis)
        return volume(halfspace_intersection(N, c, interior=z))
    return K.cone_volume(cone_triangles(U), rtol=rtol)


def polar_patch_volume(K, dirs, rtol=None):
    """Volume of o * Lambda(boundary of K over pos(dirs)) for a smooth body."""
    if K.is_polytope:
        raise PreconditionError("Lambda images are defined for smooth bodies only")
    return K.polar_patch_volume(cone_triangles(dirs), rtol=rtol)
