"""Oriented planes through the origin, cross-sections and projections."""
from dataclasses import dataclass

import numpy as np

from .constants import TOL
from .hull import hull2d, polygon_area

DEFAULT_ANGLES = 2048


@dataclass(frozen=True, eq=False)
class Plane:
    """Oriented plane through o with orthonormal frame (e1, e2) and normal n = e1 x e2."""

    e1: np.ndarray
    e2: np.ndarray

    @property
    def normal(self):
        return np.cross(self.e1, self.e2)

    @classmethod
    def spanned(cls, a, b):
        """Plane span{a, b} oriented so that a, b, a x b is right-handed."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n = np.cross(a, b)
        nn = np.linalg.norm(n)
        if nn <= 1e-14 * np.linalg.norm(a) * np.linalg.norm(b):
            raise ValueError("parallel vectors do not span a plane")
        n = n / nn
        e1 = a / np.linalg.norm(a)
        return cls(e1, np.cross(n, e1))

    @classmethod
    def from_normal(cls, n):
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        helper = np.eye(3)[int(np.argmin(np.abs(n)))]
        e1 = np.cross(helper, n)
        e1 /= np.linalg.norm(e1)
        return cls(e1, np.cross(n, e1))

    def coords(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([x @ self.e1, x @ self.e2], axis=-1)

    def lift(self, xy):
        xy = np.asarray(xy, dtype=float)
        return xy[..., :1] * self.e1 + xy[..., 1:2] * self.e2

    def project(self, x):
        return self.lift(self.coords(x))


@dataclass(frozen=True, eq=False)
class Region2D:
    """Convex region of a plane, stored as a ccw polygon in the plane's frame."""

    plane: Plane
    polygon: np.ndarray
    exact: bool = True

    @property
    def area(self):
        return polygon_area(self.polygon)

    def points3d(self):
        return self.plane.lift(self.polygon)


def _polygon(points2d):
    idx = hull2d(points2d)
    return np.asarray(points2d, dtype=float)[idx]


def cross_section(K, plane, n_angles=DEFAULT_ANGLES):
    """K intersected with the plane: exact polygon for polytopes, radial samples otherwise."""
    if K.is_polytope:
        V = K.vertices
        d = V @ plane.normal
        scale = max(1.0, float(np.max(np.abs(V))))
        tol = TOL.plane * scale
        pts = [V[np.abs(d) <= tol]]
        for i, j in K.edges():
            if (d[i] < -tol and d[j] > tol) or (d[i] > tol and d[j] < -tol):
                t = d[i] / (d[i] - d[j])
                pts.append((V[i] + t * (V[j] - V[i]))[None])
        P = plane.coords(np.vstack(pts))
        return Region2D(plane, _polygon(P), exact=not K.approximate)
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    U = np.outer(np.cos(th), plane.e1) + np.outer(np.sin(th), plane.e2)
    X = U / K.gauge(U)[:, None]
    return Region2D(plane, plane.coords(X), exact=False)


def projection(K, plane, n_angles=DEFAULT_ANGLES):
    """Orthogonal projection of K onto the plane (polytopes exact, smooth via support points)."""
    if K.is_polytope:
        return Region2D(plane, _polygon(plane.coords(K.vertices)), exact=not K.approximate)
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    D = np.outer(np.cos(th), plane.e1) + np.outer(np.sin(th), plane.e2)
    X = K.support_points(D)
    return Region2D(plane, _polygon(plane.coords(X)), exact=False)


def polar_polygon(poly):
    """Polar of a ccw polygon strictly containing o: edge normals over edge offsets."""
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    e = q - p
    n = np.column_stack([e[:, 1], -e[:, 0]])  # outward for ccw
    off = np.einsum("ij,ij->i", n, p)
    if np.any(off <= 0):
        raise ValueError("origin not interior to polygon")
    return n / off[:, None]
