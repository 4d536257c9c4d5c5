"""Convex bodies with the origin in their interior.

Three concrete kinds share one interface: polytopes (built from vertices
or halfspaces), p-norm smoothings of a halfspace family, and ellipsoids.
Everything a caller needs (gauge, radial function, support, polar body,
the boundary map Lambda = grad of the gauge, volumes) is available on each.
"""
from dataclasses import dataclass

import numpy as np

from . import hull as _hull
from .constants import TOL
from .errors import GeometryError, InvarianceError, PreconditionError
from .quadrature import fibonacci_sphere, icosahedron, integrate_sphere_triangles

DEFAULT_SMOOTH_P = 8.0
DEFAULT_POLAR_SAMPLES = 4096


@dataclass(frozen=True)
class BodyFrame:
    """Radius r with rB inside K inside B/r."""

    r: float
    inner: float
    outer: float


def _as_points(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 3), x.ndim == 1


def adjugate_times(H, u):
    """adj(H) u for a stack of symmetric 3x3 matrices."""
    c1 = np.cross(H[:, 1], H[:, 2])
    c2 = np.cross(H[:, 2], H[:, 0])
    c3 = np.cross(H[:, 0], H[:, 1])
    return u[:, :1] * c1 + u[:, 1:2] * c2 + u[:, 2:3] * c3


class ConvexBody:
    is_polytope = False
    approximate = False
    kind = "body"

    # -- to be provided by subclasses: gauge, polar, support_points, transformed

    def gauge(self, x):
        raise NotImplementedError

    def radial(self, x):
        X, single = _as_points(x)
        if np.any(np.linalg.norm(X, axis=1) == 0):
            raise ValueError("radial function undefined at the origin")
        r = 1.0 / self.gauge(X)
        return float(r[0]) if single else r

    def boundary_point(self, d):
        """The point of the boundary on the ray through ``d``."""
        X, single = _as_points(d)
        B = X / self.gauge(X)[:, None]
        return B[0] if single else B

    def on_boundary(self, x, tol=TOL.boundary):
        return abs(float(self.gauge(x)) - 1.0) <= tol

    def support(self, d):
        X, single = _as_points(d)
        h = np.einsum("ij,ij->i", self.support_points(X), X)
        return float(h[0]) if single else h

    def scaled(self, s):
        return self.transformed(s * np.eye(3))

    def _frame_from_samples(self, n=DEFAULT_POLAR_SAMPLES, safety=0.02):
        U = fibonacci_sphere(n)
        rho = 1.0 / self.gauge(U)
        inner = float(rho.min()) * (1 - safety)
        outer = float(rho.max()) * (1 + safety)
        return BodyFrame(min(1.0, inner, 1.0 / outer), inner, outer)


# ------------------------------------------------------------------ polytopes

class Polytope(ConvexBody):
    """Convex polytope; ``kind`` records whether it came from vertices or halfspaces."""

    is_polytope = True

    def __init__(self, h, kind="vpolytope", approximate=False):
        self.hull = h
        self.kind = kind
        self.approximate = approximate
        self.origin_interior = bool(np.all(h.offsets > TOL.feasibility))
        if self.origin_interior:
            inner = float(h.offsets.min())
            outer = float(np.linalg.norm(h.vertices, axis=1).max())
            self.frame = BodyFrame(min(1.0, inner, 1.0 / outer), inner, outer)
        else:
            self.frame = None

    @classmethod
    def from_vertices(cls, points, approximate=False):
        return cls(_hull.convex_hull(points), "vpolytope", approximate)

    @classmethod
    def from_halfspaces(cls, normals, offsets, interior=(0.0, 0.0, 0.0), approximate=False):
        h = _hull.halfspace_intersection(normals, offsets, interior)
        return cls(h, "hpolytope", approximate)

    @property
    def vertices(self):
        return self.hull.vertices

    @property
    def normals(self):
        return self.hull.normals

    @property
    def offsets(self):
        return self.hull.offsets

    @property
    def rings(self):
        return self.hull.rings

    def edges(self):
        return self.hull.edges()

    def _require_origin(self):
        if not self.origin_interior:
            raise GeometryError("origin is not interior to the polytope")

    @property
    def dual_points(self):
        """Facet normals over offsets: the vertices of the polar body."""
        self._require_origin()
        return self.normals / self.offsets[:, None]

    def gauge(self, x):
        self._require_origin()
        X, single = _as_points(x)
        g = np.maximum((X @ self.dual_points.T).max(axis=1), 0.0)
        return float(g[0]) if single else g

    def support_points(self, d):
        X, _ = _as_points(d)
        return self.vertices[np.argmax(X @ self.vertices.T, axis=1)]

    def volume(self):
        return _hull.volume(self.hull)

    def centroid(self):
        return _hull.centroid(self.hull)

    def polar(self, z=None):
        """Polar body about ``z`` (default o) as a vertex polytope."""
        z = np.zeros(3) if z is None else np.asarray(z, dtype=float)
        if np.any(self.offsets - self.normals @ z <= TOL.feasibility):
            raise GeometryError("polar base point is not interior")
        V = self.vertices - z
        h = _hull.halfspace_intersection(V, np.ones(len(V)))
        return Polytope(_hull.Hull(h.vertices + z, h.normals, h.offsets + h.normals @ z,
                                   h.rings), "vpolytope", self.approximate)

    def polar_volume(self):
        return self.polar().volume()

    def active_facets(self, x, tol=TOL.boundary):
        x = np.asarray(x, dtype=float)
        scale = max(1.0, float(np.linalg.norm(x)))
        return np.flatnonzero(np.abs(self.normals @ x - self.offsets) <= tol * scale)

    def lambda_map(self, x, tol=TOL.boundary):
        """n/offset of the lowest-index facet through x (x must be on the boundary)."""
        x = np.asarray(x, dtype=float)
        if abs(self.gauge(x) - 1.0) > tol:
            raise PreconditionError("point is not on the boundary")
        idx = self.active_facets(x, tol)
        if len(idx) == 0:
            idx = [int(np.argmax(x @ self.dual_points.T))]
        return self.dual_points[idx[0]]

    def transformed(self, A):
        A = np.asarray(A, dtype=float)
        return Polytope.from_vertices(self.vertices @ A.T, self.approximate)

    def translated(self, t):
        return Polytope.from_vertices(self.vertices + np.asarray(t, dtype=float), self.approximate)

    def halfspace_family(self):
        """Normals scaled so that the body is {x : n_i . x <= 1}."""
        return self.dual_points


# ----------------------------------------------------------- smooth bodies

class _SmoothMixin:
    """Quadrature-based volumes and the Lambda calculus for C^1 gauges.

    Subclasses provide ``gauge``, ``gradient`` (0-homogeneous) and
    ``hessian`` ((-1)-homogeneous).
    """

    quad_rtol = 1e-10

    def lambda_map(self, x, tol=TOL.boundary):
        X, single = _as_points(x)
        if np.any(np.abs(self.gauge(X) - 1.0) > tol):
            raise PreconditionError("point is not on the boundary")
        G = self.gradient(X)
        return G[0] if single else G

    def cone_volume(self, tris, rtol=None):
        """Volume of K over the cones spanned by spherical triangles."""
        return float(integrate_sphere_triangles(
            lambda U: self.gauge(U) ** -3 / 3.0, tris, rtol=rtol or self.quad_rtol))

    def polar_patch_volume(self, tris, rtol=None):
        """Volume of the cone over Lambda of the boundary patch above ``tris``."""
        def f(U):
            _, g, H = self.derivatives(U)
            return np.einsum("ij,ij->i", g, adjugate_times(H, U)) / 3.0
        return float(integrate_sphere_triangles(f, tris, rtol=rtol or self.quad_rtol))

    def derivatives(self, X):
        return self.gauge(X), self.gradient(X), self.hessian(X)

    def volume(self):
        return self.cone_volume(_sphere_tris())

    def polar_volume(self):
        return self.polar_patch_volume(_sphere_tris())

    def support_points(self, d):
        """Maximizers of d . x over K, by Newton on |x|_K^2 / 2 - d . x."""
        D, _ = _as_points(d)
        X = self.boundary_point(D)
        X = X * np.maximum(np.einsum("ij,ij->i", X, D), 1e-300)[:, None]
        for _ in range(100):
            mu = self.gauge(X)
            g = self.gradient(X)
            grad = mu[:, None] * g - D
            gn = np.linalg.norm(grad, axis=1)
            todo = gn > 1e-14 * np.linalg.norm(D, axis=1)
            if not np.any(todo):
                break
            Hs = mu[:, None, None] * self.hessian(X) + g[:, :, None] * g[:, None, :]
            Hs = Hs + 1e-12 * np.trace(Hs, axis1=1, axis2=2)[:, None, None] * np.eye(3)
            step = -np.linalg.solve(Hs, grad[..., None])[..., 0]
            psi0 = 0.5 * mu ** 2 - np.einsum("ij,ij->i", D, X)
            t = np.ones(len(X))
            for _ in range(40):
                Y = X + t[:, None] * step
                psi = 0.5 * self.gauge(Y) ** 2 - np.einsum("ij,ij->i", D, Y)
                bad = psi > psi0 + 1e-15 * np.abs(psi0)
                if not np.any(bad):
                    break
                t = np.where(bad, 0.5 * t, t)
            X = np.where(todo[:, None], X + t[:, None] * step, X)
        return X / self.gauge(X)[:, None]

    def polar(self, z=None, n=DEFAULT_POLAR_SAMPLES):
        """Approximate polar from n boundary samples (flagged approximate)."""
        if z is not None and np.any(np.asarray(z) != 0):
            raise GeometryError("smooth polars are only taken about the origin")
        P = Polytope.from_vertices(self.boundary_point(fibonacci_sphere(n)), approximate=True)
        return P.polar()


_SPHERE_TRIS = None


def _sphere_tris():
    global _SPHERE_TRIS
    if _SPHERE_TRIS is None:
        from .quadrature import _subdivide
        _SPHERE_TRIS = _subdivide(icosahedron())
    return _SPHERE_TRIS


class SmoothBody(_SmoothMixin, ConvexBody):
    """Gauge (sum_i max(n_i . x, 0)^p)^(1/p) over a family of halfspaces n_i . x <= 1."""

    kind = "smooth"

    def __init__(self, normals, p=DEFAULT_SMOOTH_P):
        N = np.atleast_2d(np.asarray(normals, dtype=float))
        if p < 2:
            raise ValueError("exponent p must be at least 2")
        if N.shape[1] != 3 or not np.all(np.isfinite(N)):
            raise ValueError("normals must be finite 3-vectors")
        try:
            dual = _hull.convex_hull(N)
        except _hull.DegenerateInputError as exc:
            raise GeometryError("halfspace family is unbounded") from exc
        if np.any(dual.offsets <= TOL.feasibility):
            raise GeometryError("halfspace family is unbounded")
        self.normals = N
        self._outer = np.einsum("mi,mj->mij", N, N).reshape(len(N), 9)
        self.p = float(p)
        self.frame = self._frame_from_samples()

    def _pow(self, q, k):
        # integer exponents avoid the much slower float pow
        e = self.p - k
        return q ** int(e) if e == int(e) else q ** e

    def _parts(self, X):
        S = np.maximum(X @ self.normals.T, 0.0)
        smax = S.max(axis=1)
        safe = np.where(smax > 0, smax, 1.0)
        mu = smax * np.sum(self._pow(S / safe[:, None], 0), axis=1) ** (1.0 / self.p)
        return S, mu

    def gauge(self, x):
        X, single = _as_points(x)
        mu = self._parts(X)[1]
        return float(mu[0]) if single else mu

    def derivatives(self, X):
        """Gauge, gradient and Hessian at the rows of X in one pass."""
        S, mu = self._parts(X)
        q = S / np.where(mu > 0, mu, 1.0)[:, None]
        w = np.where(S > 0, self._pow(q, 2), 0.0)
        g = (w * q) @ self.normals
        M = (w @ self._outer).reshape(-1, 3, 3)
        H = (self.p - 1) / mu[:, None, None] * (M - g[:, :, None] * g[:, None, :])
        return mu, g, H

    def gradient(self, x):
        X, single = _as_points(x)
        S, mu = self._parts(X)
        q = S / np.where(mu > 0, mu, 1.0)[:, None]
        G = self._pow(q, 1) @ self.normals
        return G[0] if single else G

    def hessian(self, x):
        X, single = _as_points(x)
        H = self.derivatives(X)[2]
        return H[0] if single else H

    def transformed(self, A):
        A = np.asarray(A, dtype=float)
        return SmoothBody(self.normals @ np.linalg.inv(A), self.p)

    def hausdorff_bound(self):
        """Bound on the distance to the polytope {n_i . x <= 1} (the body sits inside it)."""
        m = len(self.normals)
        outer = Polytope.from_halfspaces(self.normals, np.ones(m))
        R = float(np.linalg.norm(outer.vertices, axis=1).max())
        return (1.0 - m ** (-1.0 / self.p)) * R


class Ellipsoid(_SmoothMixin, ConvexBody):
    """The body A B for an invertible matrix A (the unit ball when A = I)."""

    kind = "ellipsoid"

    def __init__(self, A=None):
        A = np.eye(3) if A is None else np.asarray(A, dtype=float)
        if abs(np.linalg.det(A)) < 1e-14:
            raise GeometryError("singular ellipsoid matrix")
        self.A = A
        self.Ainv = np.linalg.inv(A)
        self.Q = self.Ainv.T @ self.Ainv
        sv = np.linalg.svd(A, compute_uv=False)
        self.frame = BodyFrame(min(1.0, sv.min(), 1.0 / sv.max()), sv.min(), sv.max())

    def gauge(self, x):
        X, single = _as_points(x)
        mu = np.linalg.norm(X @ self.Ainv.T, axis=1)
        return float(mu[0]) if single else mu

    def gradient(self, x):
        X, single = _as_points(x)
        mu = np.linalg.norm(X @ self.Ainv.T, axis=1)
        G = (X @ self.Q) / mu[:, None]
        return G[0] if single else G

    def hessian(self, x):
        X, single = _as_points(x)
        mu = np.linalg.norm(X @ self.Ainv.T, axis=1)
        g = (X @ self.Q) / mu[:, None]
        H = (self.Q[None] - g[:, :, None] * g[:, None, :]) / mu[:, None, None]
        return H[0] if single else H

    def support_points(self, d):
        D, _ = _as_points(d)
        W = D @ self.A
        return (W @ self.A.T) / np.linalg.norm(W, axis=1)[:, None]

    def polar(self, z=None, n=None):
        if z is not None and np.any(np.asarray(z) != 0):
            raise GeometryError("ellipsoid polars are only taken about the origin")
        return Ellipsoid(self.Ainv.T)

    def transformed(self, A):
        return Ellipsoid(np.asarray(A, dtype=float) @ self.A)

    def exact_volume(self):
        return 4.0 * np.pi / 3.0 * abs(np.linalg.det(self.A))


def ball(radius=1.0):
    return Ellipsoid(radius * np.eye(3))


# ------------------------------------------------------------ constructors

def family_is_closed(normals, G, tol=1e-10):
    """Whether every g in G permutes the rows of ``normals`` (within tol)."""
    N = np.asarray(normals, dtype=float)
    for g in G.matrices:
        M = N @ g.T
        d = np.linalg.norm(M[:, None, :] - N[None, :, :], axis=2)
        if np.any(d.min(axis=1) > tol):
            return False
    return True


def smooth_approx(K, p=DEFAULT_SMOOTH_P, G=None):
    """p-norm smoothing of a polytope's facet family (or a raw normal family)."""
    N = K.halfspace_family() if isinstance(K, Polytope) else np.asarray(K, dtype=float)
    if G is not None:
        scale = max(1.0, float(np.abs(N).max()))
        if not family_is_closed(N, G, 1e-10 * scale):
            raise InvarianceError(f"halfspace family is not closed under {G.name}")
    return SmoothBody(N, p)


def gauge_gradient_check(K, x, h=1e-5):
    """Max abs difference between the analytic gradient and central differences."""
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0:
        raise ValueError("gradient check needs x != o")
    E = np.eye(3) * h
    fd = (K.gauge(x + E) - K.gauge(x - E)) / (2 * h)
    return float(np.max(np.abs(fd - K.gradient(x))))


def polar_volume(K):
    return K.polar_volume()
