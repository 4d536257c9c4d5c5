"""Parameter solvers: the D2 equipartition (a, b, c) and the S4 balance u."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curves import sector_area
from .errors import SolverError
from .fixtures import d2_vertices, s4_vertices

_DIRS = np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2], [-0.5, -math.sqrt(3) / 2]])


@dataclass
class D2Partition:
    p: np.ndarray
    S: tuple
    residual: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {"p": [float(t) for t in self.p], "S": [float(s) for s in self.S],
                "residual": float(self.residual), "diagnostics": self.diagnostics}


@dataclass
class S4Balance:
    u: float
    c_val: float
    beta_val: float
    residual: float
    bracket: tuple = (None, None)
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {"u": self.u, "c": self.c_val, "beta": self.beta_val, "residual": self.residual,
                "bracket": list(self.bracket), "diagnostics": self.diagnostics}


# ------------------------------------------------------------------ D2

def d2_ratios(K, p):
    """Normalized sector areas S1, S2, S3 of the fundamental cone's three sides."""
    a, b, c = (float(t) for t in p)
    _, vmpp, vpmp, vppm = d2_vertices((a, b, c))
    S1 = sector_area(K, vpmp, vppm) / math.sqrt(c * c * a * a + a * a * b * b)
    S2 = sector_area(K, vppm, vmpp) / math.sqrt(b * b * c * c + a * a * b * b)
    S3 = sector_area(K, vmpp, vpmp) / math.sqrt(b * b * c * c + c * c * a * a)
    return S1, S2, S3


def d2_F(K, p):
    return np.asarray(d2_ratios(K, p)) @ _DIRS


def residual_of(S):
    S = np.asarray(S, dtype=float)
    return float((S.max() - S.min()) / S.max())


def _angle(v):
    return math.atan2(v[1], v[0])


def winding_number(F, polygon, samples=8, max_depth=64, cache=None):
    """Winding number of the planar map F around o along a closed polygon.

    Each edge is cut into ``samples`` pieces; a piece is accepted when the
    chord between its endpoint values stays farther from o than its own
    length (then the continuous image cannot circle o in between), and is
    bisected otherwise.  A piece still unresolved after ``max_depth``
    bisections signals a zero on or near the boundary.
    """
    cache = {} if cache is None else cache

    def value(x):
        key = tuple(np.round(x, 15))
        if key not in cache:
            cache[key] = np.asarray(F(x), dtype=float)
        return cache[key]

    P = [np.asarray(q, dtype=float) for q in polygon]
    total = 0.0
    for i in range(len(P)):
        x0, x1 = P[i], P[(i + 1) % len(P)]
        ts = np.linspace(0.0, 1.0, samples + 1)
        # walk pieces left to right, bisecting in place
        stack = [(ts[k], ts[k + 1], 0) for k in range(samples)][::-1]
        while stack:
            s0, s1, depth = stack.pop()
            f0 = value((1 - s0) * x0 + s0 * x1)
            f1 = value((1 - s1) * x0 + s1 * x1)
            if min(np.linalg.norm(f0), np.linalg.norm(f1)) > np.linalg.norm(f1 - f0):
                d = _angle(f1) - _angle(f0)
                total += (d + math.pi) % (2 * math.pi) - math.pi
                continue
            if depth >= max_depth:
                raise SolverError("F vanishes on or near the boundary polygon",
                                  {"point": ((1 - s0) * x0 + s0 * x1).tolist(),
                                   "F": f0.tolist()})
            sm = 0.5 * (s0 + s1)
            stack.append((sm, s1, depth + 1))
            stack.append((s0, sm, depth + 1))
    return int(round(total / (2 * math.pi)))


def epsilon_for(r, start=0.125, max_halvings=200):
    """Largest eps = start / 2^k meeting the corner estimate for the triangle T."""
    eps = start
    lead = r * r * math.pi / (8 * math.sqrt(2))
    for _ in range(max_halvings):
        if eps < 0.1:
            worst = max(math.pi * math.sqrt(eps), 2 * math.acos(1 - 20 * eps)) / (r * r)
            if lead - worst > 0:
                return eps
        eps /= 2
    raise SolverError("no admissible eps for the search triangle", {"r": r})


def _triangle(eps):
    # scaled onto a + b + c = 3
    T = np.array([[1.0, eps, eps], [eps, 1.0, eps], [eps, eps, 1.0]])
    return T * (3.0 / (1.0 + 2.0 * eps))


def _split(tri):
    a, b, c = tri
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return [np.array(t) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))]


def _diameter(tri):
    return max(np.linalg.norm(tri[i] - tri[j]) for i, j in ((0, 1), (1, 2), (2, 0)))


def _newton(K, x0, basis, tol, max_iter=60, h=1e-6):
    """Damped Newton on R = (S1 - S2, S2 - S3) / max S in the plane a + b + c = 3."""
    def R(x):
        if np.any(x <= 0):
            return None, None
        S = np.asarray(d2_ratios(K, x))
        return np.array([S[0] - S[1], S[1] - S[2]]) / S.max(), S

    x = np.asarray(x0, dtype=float)
    r, S = R(x)
    it = 0
    for it in range(1, max_iter + 1):
        if residual_of(S) <= tol:
            return x, S, it - 1
        J = np.empty((2, 2))
        for k in range(2):
            rk, _ = R(x + h * basis[k])
            if rk is None:
                return x, S, it
            J[:, k] = (rk - r) / h
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return x, S, it
        lam = 1.0
        while lam > 1e-6:
            xn = x + lam * (basis.T @ step)
            rn, Sn = R(xn)
            if rn is not None and np.linalg.norm(rn) < np.linalg.norm(r):
                x, r, S = xn, rn, Sn
                break
            lam /= 2
        else:
            return x, S, it
    return x, S, it


def solve_d2(K, tol=1e-10, min_diameter=1e-12, newton_from=1e-1, max_keep=16):
    """Equipartition parameters p = (a, b, c), normalized to a + b + c = 3.

    The search starts on a triangle T whose boundary image under F has
    winding number +-1, splits it 4-ways keeping children with nonzero
    winding, and polishes the best retained child with damped Newton.
    """
    r = K.frame.r
    eps = epsilon_for(r)
    T = _triangle(eps)
    F = lambda x: d2_F(K, x)  # noqa: E731
    cache = {}
    w0 = winding_number(F, T, cache=cache)
    diag = {"r": r, "eps": eps, "root_winding": w0, "levels": [], "newton": []}
    if w0 == 0:
        raise SolverError("winding number of F around the search triangle is zero", diag)
    basis = np.array([T[1] - T[0], T[2] - T[0]])
    basis /= np.linalg.norm(basis, axis=1)[:, None]
    kept = [T]
    best = None
    level = 0
    while True:
        diam = _diameter(kept[0])
        if diam <= newton_from:
            for tri in kept:
                x, S, its = _newton(K, tri.mean(axis=0), basis, tol)
                res = residual_of(S)
                diag["newton"].append({"level": level, "iterations": its, "residual": res})
                if best is None or res < best[2]:
                    best = (x, S, res)
            if best[2] <= tol:
                break
        if diam <= min_diameter:
            break
        children = []
        for tri in kept:
            for child in _split(tri):
                try:
                    w = winding_number(F, child, cache=cache)
                except SolverError:
                    # a zero sits on the child's boundary: keep it, Newton will find it
                    w = None
                if w != 0:
                    children.append(child)
        level += 1
        diag["levels"].append(len(children))
        if not children:
            raise SolverError("winding lost at every sub-triangle", diag)
        kept = children[:max_keep]
    diag["retained"] = len(kept)
    diag["evaluations"] = len(cache)
    if best is None or best[2] > tol:
        raise SolverError("equipartition not resolved to tolerance", diag)
    x, S, res = best
    x = 3.0 * x / x.sum()
    return D2Partition(x, tuple(float(s) for s in S), res, diag)


# ------------------------------------------------------------------ S4

def s4_c_beta(K, u):
    v = s4_vertices(u)
    c = sector_area(K, v[0], v[1]) / math.sqrt(1 + 2 * u * u)
    beta = sector_area(K, v[2], v[0])
    return c, beta


def s4_g(K, u):
    c, beta = s4_c_beta(K, u)
    return 2 * u * c - beta


def solve_s4(K, tol=1e-10, cap=2.0 ** 40):
    """u with beta(u) = 2 u c(u), bracketed by geometric expansion from u = 1."""
    samples = []

    def ratio(u):
        c, beta = s4_c_beta(K, u)
        samples.append((u, 2 * u * c - beta))
        return u * c / beta

    c1, b1 = s4_c_beta(K, 1.0)
    if abs(2 * c1 - b1) <= tol * b1:
        return S4Balance(1.0, c1, b1, abs(2 * c1 - b1) / b1, (1.0, 1.0), {"samples": []})
    m = 1.0
    while ratio(m) > 0.25:
        m /= 2
        if m < 1 / cap:
            raise SolverError("lower bracket not found", {"samples": samples})
    M = 1.0
    while ratio(M) < 1.0:
        M *= 2
        if M > cap:
            raise SolverError("upper bracket not found", {"samples": samples})
    g = lambda u: s4_g(K, u)  # noqa: E731
    u, info = brentq(g, m, M, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500,
                     full_output=True)
    c, beta = s4_c_beta(K, u)
    res = abs(beta - 2 * u * c) / beta
    diag = {"samples": samples, "iterations": info.iterations, "g_low": g(m), "g_high": g(M)}
    if res > tol:
        raise SolverError("balance not resolved to tolerance", diag | {"residual": res})
    return S4Balance(float(u), c, beta, res, (m, M), diag)
