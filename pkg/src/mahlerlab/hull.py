"""3D polytope kernel: hulls with merged coplanar facets, halfspace
intersection by polar duality, volumes, centroids, and a small 2D kernel.

Qhull (through scipy) supplies the triangulated hull; triangles are merged
into planar facets and facet rings are rebuilt from a 2D hull of each
facet's points, which also drops points lying inside edges.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .constants import TOL
from .errors import GeometryError


class DegenerateInputError(GeometryError):
    """Points do not span three dimensions."""


class UnboundedError(GeometryError):
    """Halfspace system does not describe a bounded set."""


class InfeasibleInteriorError(GeometryError):
    """Proposed interior point violates (or touches) a halfspace."""


@dataclass(frozen=True, eq=False)
class Hull:
    """Vertices plus facets; rings index ``vertices`` counterclockwise from outside."""

    vertices: np.ndarray
    normals: np.ndarray   # unit outward normals, (F, 3)
    offsets: np.ndarray   # n . x <= offset on the polytope, (F,)
    rings: tuple

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_facets(self):
        return len(self.normals)

    def edges(self):
        es = set()
        for ring in self.rings:
            for i, j in zip(ring, np.roll(ring, -1)):
                es.add((min(i, j), max(i, j)))
        return sorted(es)

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges()) + self.n_facets


# ---------------------------------------------------------------- 2D kernel

def cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def hull2d(points, tol=1e-12):
    """Counterclockwise hull (Andrew's monotone chain), collinear points removed.

    Returns indices into ``points``.
    """
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    scale = max(1.0, float(np.max(np.abs(pts)))) if len(pts) else 1.0

    def build(idx):
        chain = []
        for i in idx:
            while len(chain) >= 2:
                o, a = pts[chain[-2]], pts[chain[-1]]
                if cross2(a - o, pts[i] - o) <= tol * scale * scale:
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = build(order)
    upper = build(order[::-1])
    ring = lower[:-1] + upper[:-1]
    # drop exact duplicates that can survive when all points coincide
    out = []
    for i in ring:
        if not out or np.max(np.abs(pts[i] - pts[out[-1]])) > tol * scale:
            out.append(i)
    return np.array(out, dtype=int)


def polygon_area(poly):
    p = np.asarray(poly, dtype=float)
    return 0.5 * float(np.sum(cross2(p, np.roll(p, -1, axis=0))))


def ray_hit(poly, d):
    """Boundary point of a star-shaped (about o) ccw polygon along direction ``d``.

    Returns (point, edge index i) with the point on edge [p_i, p_{i+1}].
    """
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    d = np.asarray(d, dtype=float)
    best = None
    for i in range(len(p)):
        e = q[i] - p[i]
        den = cross2(d, e)
        if abs(den) < 1e-300:
            continue
        t = -cross2(d, p[i]) / den
        if -1e-12 <= t <= 1 + 1e-12:
            x = p[i] + min(max(t, 0.0), 1.0) * e
            s = float(np.dot(x, d))
            if s > 0 and (best is None or abs(cross2(d, x)) < best[2]):
                # the segment from o must leave through this edge
                if cross2(p[i], d) >= -1e-12 * np.linalg.norm(p[i]) * np.linalg.norm(d) and \
                   cross2(d, q[i]) >= -1e-12 * np.linalg.norm(q[i]) * np.linalg.norm(d):
                    best = (x, i, abs(cross2(d, x)))
    if best is None:
        raise ValueError("ray does not meet the polygon boundary")
    return best[0], best[1]


def polygon_arc(poly, da, db):
    """Counterclockwise boundary arc of ``poly`` from the ray along ``da`` to the ray along ``db``.

    ``poly`` must be ccw and strictly star-shaped about the origin.  The arc
    may sweep more than a half turn.
    """
    p = np.asarray(poly, dtype=float)
    a_hat, _ = ray_hit(p, da)
    b_hat, _ = ray_hit(p, db)
    th_a = np.arctan2(da[1], da[0])
    sweep = (np.arctan2(db[1], db[0]) - th_a) % (2 * np.pi)
    rel = (np.arctan2(p[:, 1], p[:, 0]) - th_a) % (2 * np.pi)
    eps = 1e-13
    inside = (rel > eps) & (rel < sweep - eps)
    mids = p[inside][np.argsort(rel[inside], kind="stable")]
    return np.vstack([a_hat[None], mids, b_hat[None]])


def fan_area(arc):
    """Area of o * arc (sum of signed triangle areas o, x_i, x_{i+1})."""
    a = np.asarray(arc, dtype=float)
    return 0.5 * float(np.sum(cross2(a[:-1], a[1:])))


# ---------------------------------------------------------------- 3D hull

def _newell(points):
    q = np.roll(points, -1, axis=0)
    return 0.5 * np.cross(points, q).sum(axis=0)


def dedupe(points, tol):
    """Drop points within ``tol`` of an earlier point (first occurrence kept)."""
    pts = np.asarray(points, dtype=float)
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    parent = np.arange(len(pts))
    for i, j in sorted(map(tuple, np.sort(pairs, axis=1))):
        ri = parent[i]
        if keep[ri] and ri != j and keep[j]:
            keep[j] = False
            parent[j] = ri
    return pts[keep]


def _boundary_cycle(tris):
    """Ordered boundary of a disk made of consistently oriented triangles."""
    directed = set()
    for i, j, k in tris:
        directed.update(((i, j), (j, k), (k, i)))
    nxt = {}
    for i, j in directed:
        if (j, i) not in directed:
            nxt[i] = j
    if not nxt:
        return np.array([], dtype=int)
    start = min(nxt)
    ring = [start]
    while True:
        j = nxt[ring[-1]]
        if j == start or len(ring) > len(nxt):
            break
        ring.append(j)
    return np.array(ring, dtype=int)


def _drop_collinear(pts, ring, tol):
    ring = list(ring)
    changed = True
    while changed and len(ring) > 3:
        changed = False
        for k in range(len(ring)):
            p, m, q = pts[ring[k - 1]], pts[ring[k]], pts[ring[(k + 1) % len(ring)]]
            e = q - p
            L = np.linalg.norm(e)
            if L == 0 or np.linalg.norm(np.cross(m - p, e)) / L <= tol:
                del ring[k]
                changed = True
                break
    return np.array(ring, dtype=int)


def convex_hull(points, tol=TOL.plane):
    """Convex hull with coplanar triangles merged into facets.

    Raises DegenerateInputError when the points are flat, collinear or too few.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise DegenerateInputError("need at least 4 points in R^3")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite coordinates")
    pts = dedupe(pts, TOL.vertex_merge * max(1.0, float(np.max(np.abs(pts)))))
    if len(pts) < 4:
        raise DegenerateInputError("need at least 4 distinct points in R^3")
    centered = pts - pts.mean(axis=0)
    scale = max(float(np.max(np.linalg.norm(centered, axis=1))), 1e-300)
    sv = np.linalg.svd(centered / scale, compute_uv=False)
    if sv[-1] < 1e-10:
        kind = "collinear" if sv[1] < 1e-10 else "flat"
        raise DegenerateInputError(f"{kind} point set")
    try:
        qh = ConvexHull(pts)
    except QhullError as exc:  # pragma: no cover - guarded by the rank test
        raise DegenerateInputError(str(exc)) from exc

    ptol = tol * max(1.0, float(np.max(np.abs(pts))))
    ntri = len(qh.simplices)
    parent = list(range(ntri))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    eqs = qh.equations
    for i in range(ntri):
        for j in qh.neighbors[i]:
            if j <= i:
                continue
            ni, di = eqs[i, :3], eqs[i, 3]
            nj, dj = eqs[j, :3], eqs[j, 3]
            if (np.all(np.abs(pts[qh.simplices[j]] @ ni + di) <= ptol)
                    and np.all(np.abs(pts[qh.simplices[i]] @ nj + dj) <= ptol)):
                parent[find(i)] = find(j)

    groups = {}
    for i in range(ntri):
        groups.setdefault(find(i), []).append(i)

    interior = pts[qh.vertices].mean(axis=0)
    simp = qh.simplices.copy()
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), eqs[:, :3]) < 0
    simp[flip] = simp[flip][:, [0, 2, 1]]

    facets = []
    for tris in groups.values():
        ring = _boundary_cycle(simp[tris])
        ring = _drop_collinear(pts, ring, 1e-12 * max(1.0, float(np.max(np.abs(pts)))))
        if len(ring) < 3:
            continue
        normal = _newell(pts[ring])
        if not np.linalg.norm(normal) > 0:
            continue
        normal /= np.linalg.norm(normal)
        if np.dot(normal, pts[ring].mean(axis=0) - interior) < 0:
            normal = -normal
            ring = ring[::-1]
        offset = float(np.mean(pts[ring] @ normal))
        facets.append((normal, offset, ring))

    used = np.unique(np.concatenate([f[2] for f in facets]))
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    vertices = pts[used].copy()
    # deterministic facet order: lexicographic on rounded normals
    facets.sort(key=lambda f: tuple(np.round(f[0], 9)) + (round(f[1], 9),))
    normals = np.array([f[0] for f in facets])
    offsets = np.array([f[1] for f in facets])
    rings = tuple(remap[f[2]] for f in facets)
    return Hull(vertices, normals, offsets, rings)


def halfspace_intersection(normals, offsets, interior=(0.0, 0.0, 0.0),
                           slack=TOL.feasibility):
    """Vertices and facets of {x : n_i . x <= c_i}, via the dual hull about ``interior``."""
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    c = np.asarray(offsets, dtype=float).ravel()
    z = np.asarray(interior, dtype=float)
    if np.any(np.linalg.norm(N, axis=1) == 0):
        raise ValueError("zero halfspace normal")
    shifted = c - N @ z
    if np.any(shifted <= slack * np.linalg.norm(N, axis=1)):
        raise InfeasibleInteriorError("interior point is not strictly feasible")
    dual = N / shifted[:, None]
    try:
        dh = convex_hull(dual)
    except DegenerateInputError as exc:
        raise UnboundedError("halfspace normals do not positively span R^3") from exc
    if np.any(dh.offsets <= slack * max(1.0, float(np.max(np.abs(dual))))):
        raise UnboundedError("dual origin not strictly inside the dual hull")
    primal = dh.normals / dh.offsets[:, None] + z
    return convex_hull(primal)


def facet_areas(h):
    return np.array([np.linalg.norm(_newell(h.vertices[r])) for r in h.rings])


def volume(h):
    """Volume from facet cone volumes; apex at o when interior, else the vertex centroid."""
    apex = np.zeros(3)
    if np.any(h.offsets <= 0):
        apex = h.vertices.mean(axis=0)
    heights = h.offsets - h.normals @ apex
    return float(np.sum(heights * facet_areas(h)) / 3.0)


def _tetrahedra(h):
    apex = h.vertices.mean(axis=0)
    tets = []
    for ring in h.rings:
        p = h.vertices[ring]
        for k in range(1, len(ring) - 1):
            tets.append((apex, p[0], p[k], p[k + 1]))
    return np.array(tets)


def centroid(h):
    tets = _tetrahedra(h)
    vols = np.einsum("ij,ij->i", tets[:, 1] - tets[:, 0],
                     np.cross(tets[:, 2] - tets[:, 0], tets[:, 3] - tets[:, 0])) / 6.0
    cents = tets.mean(axis=1)
    return (vols[:, None] * cents).sum(axis=0) / vols.sum()


def moments(h, about=(0.0, 0.0, 0.0)):
    """Volume, first moment and second moment matrix of the solid about a point."""
    tets = _tetrahedra(h) - np.asarray(about, dtype=float)
    vols = np.einsum("ij,ij->i", tets[:, 1] - tets[:, 0],
                     np.cross(tets[:, 2] - tets[:, 0], tets[:, 3] - tets[:, 0])) / 6.0
    s = tets.sum(axis=1)
    m1 = (vols[:, None] * s).sum(axis=0) / 4.0
    # int x x^T over a tetrahedron = vol/20 (sum p_i p_i^T + s s^T)
    outer = np.einsum("tki,tkj->tij", tets, tets) + np.einsum("ti,tj->tij", s, s)
    m2 = (vols[:, None, None] * outer).sum(axis=0) / 20.0
    return float(vols.sum()), m1, m2


def contains(h, x, tol=TOL.plane):
    x = np.atleast_2d(x)
    return np.all(x @ h.normals.T <= h.offsets + tol, axis=1)


def hausdorff_vertices(A, B):
    """Symmetric max-min distance between two finite point sets."""
    d = np.linalg.norm(np.asarray(A)[:, None, :] - np.asarray(B)[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
