"""Vectorized adaptive quadrature on intervals and on the unit sphere.

scipy's adaptive integrators call the integrand one node at a time; every
integrand here is a numpy expression over many nodes, so panels are
processed in batches instead.
"""
import numpy as np

# Gauss-Kronrod 7/15 (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 from the ends)
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
GAUSS_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    pass


def _gk_panels(f, left, right):
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    t = (mid[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    vals = np.asarray(f(t), dtype=float)
    vals = vals.reshape((len(left), KRONROD_NODES.size) + vals.shape[1:])
    wk = KRONROD_WEIGHTS.reshape((1, -1) + (1,) * (vals.ndim - 2))
    wg = GAUSS_WEIGHTS.reshape((1, -1) + (1,) * (vals.ndim - 2))
    hk = half.reshape((-1,) + (1,) * (vals.ndim - 2))
    kron = (vals * wk).sum(axis=1) * hk
    gauss = (vals[:, _GAUSS_IDX] * wg).sum(axis=1) * hk
    err = np.abs(kron - gauss)
    if err.ndim > 1:
        err = err.max(axis=1)
    return kron, err


def integrate(f, a, b, rtol=1e-12, atol=1e-15, initial_panels=4, max_rounds=400,
              max_panels=20000):
    """Adaptive Gauss-Kronrod integral of a vectorized ``f`` over [a, b].

    ``f`` maps an array of abscissae of shape (n,) to values of shape (n,)
    or (n, k).  Returns the integral (scalar or length-k array).  Panels
    holding the larger half of the summed error estimate are bisected until
    the sum meets the tolerance.
    """
    if a == b:
        sample = np.asarray(f(np.array([a], dtype=float)))
        return np.zeros(sample.shape[1:]) if sample.ndim > 1 else 0.0
    edges = np.linspace(a, b, initial_panels + 1)
    left, right = edges[:-1], edges[1:]
    kron, err = _gk_panels(f, left, right)
    for _ in range(max_rounds):
        total = kron.sum(axis=0)
        if err.sum() <= max(atol, rtol * float(np.max(np.abs(total)))):
            return total
        if len(left) > max_panels:
            break
        order = np.argsort(err)[::-1]
        cut = int(np.searchsorted(np.cumsum(err[order]), 0.5 * err.sum())) + 1
        split = np.zeros(len(err), dtype=bool)
        split[order[:cut]] = True
        mid = 0.5 * (left[split] + right[split])
        nl = np.concatenate([left[split], mid])
        nr = np.concatenate([mid, right[split]])
        k2, e2 = _gk_panels(f, nl, nr)
        keep = ~split
        left = np.concatenate([left[keep], nl])
        right = np.concatenate([right[keep], nr])
        kron = np.concatenate([kron[keep], k2])
        err = np.concatenate([err[keep], e2])
    raise QuadratureError("adaptive integration did not converge")


def fibonacci_sphere(n):
    """``n`` nearly uniform unit vectors (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
                  [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
                  [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                  [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                  [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                  [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return v[f]  # (20, 3, 3) triangles, counterclockwise seen from outside


# Dunavant degree-5 rule on the reference triangle (barycentric, weights sum to 1)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2]])
_BARY_W = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)


def _subdivide(tris):
    """Split spherical triangles (n, 3, 3) into four via normalized edge midpoints."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]

    def mid(p, q):
        m = p + q
        return m / np.linalg.norm(m, axis=1)[:, None]

    ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
    out = np.stack([
        np.stack([a, ab, ca], axis=1), np.stack([ab, b, bc], axis=1),
        np.stack([ca, bc, c], axis=1), np.stack([ab, bc, ca], axis=1)], axis=1)
    return out.reshape(-1, 3, 3)


def _triangle_rule(f, tris):
    """Degree-5 rule on the radial projection of flat triangles.

    Returns (integrals, solid_angles).
    """
    pts = np.einsum("kj,njd->nkd", _BARY, tris)  # (n, 7, 3) flat points
    normal = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    area2 = np.linalg.norm(normal, axis=1)  # twice the flat area
    nhat = normal / area2[:, None]
    rn = np.linalg.norm(pts, axis=2)
    jac = np.einsum("nkd,nd->nk", pts, nhat) / rn ** 3  # solid angle per flat area
    U = pts / rn[..., None]
    vals = np.asarray(f(U.reshape(-1, 3)), dtype=float)
    vals = vals.reshape((len(tris), len(_BARY_W)) + vals.shape[1:])
    w = _BARY_W[None, :] * jac * (0.5 * area2)[:, None]
    omega = w.sum(axis=1)
    w = w.reshape(w.shape + (1,) * (vals.ndim - 2))
    return (vals * w).sum(axis=1), omega


def integrate_sphere_triangles(f, tris, rtol=1e-10, atol=1e-14, initial_levels=0,
                               max_rounds=200, max_leaves=400000):
    """Adaptive integral of vectorized ``f(U)`` over spherical triangles.

    ``tris`` has shape (n, 3, 3) with unit-vector corners; each triangle must
    lie within an open hemisphere.  Each leaf carries the difference between
    its own rule and the sum over its four children as an error estimate;
    the leaves holding the larger half of the total estimate are split until
    the total drops below the tolerance.
    """
    tris = np.asarray(tris, dtype=float)
    tris = tris / np.linalg.norm(tris, axis=2)[..., None]
    for _ in range(initial_levels):
        tris = _subdivide(tris)
    coarse, _ = _triangle_rule(f, tris)

    def refine(tris, coarse):
        children = _subdivide(tris)
        each, _ = _triangle_rule(f, children)
        n = len(tris)
        fine = each.reshape((n, 4) + each.shape[1:]).sum(axis=1)
        err = np.abs(fine - coarse)
        if err.ndim > 1:
            err = err.max(axis=1)
        return children, each, fine, err

    children, each, fine, err = refine(tris, coarse)
    for _ in range(max_rounds):
        total = fine.sum(axis=0)
        if err.sum() <= max(atol, rtol * float(np.max(np.abs(total)))):
            return total
        order = np.argsort(err)[::-1]
        cut = int(np.searchsorted(np.cumsum(err[order]), 0.5 * err.sum())) + 1
        split = np.zeros(len(err), dtype=bool)
        split[order[:cut]] = True
        n = len(err)
        if n + 3 * cut > max_leaves:
            break
        sub = children.reshape(n, 4, 3, 3)[split].reshape(-1, 3, 3)
        sub_coarse = each.reshape((n, 4) + each.shape[1:])[split]
        sub_coarse = sub_coarse.reshape((-1,) + each.shape[1:])
        c2, e2, f2, r2 = refine(sub, sub_coarse)
        keep = ~split
        children = np.concatenate([children.reshape(n, 4, 3, 3)[keep].reshape(-1, 3, 3), c2])
        each = np.concatenate([each.reshape((n, 4) + each.shape[1:])[keep]
                               .reshape((-1,) + each.shape[1:]), e2])
        fine = np.concatenate([fine[keep], f2])
        err = np.concatenate([err[keep], r2])
    raise QuadratureError("spherical quadrature did not converge")


def integrate_sphere(f, rtol=1e-10, atol=1e-14, initial_levels=2):
    """Integral of ``f`` over the whole unit sphere."""
    return integrate_sphere_triangles(f, icosahedron(), rtol=rtol, atol=atol,
                                      initial_levels=initial_levels)
