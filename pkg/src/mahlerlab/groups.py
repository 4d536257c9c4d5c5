"""Finite subgroups of O(3) in fixed coordinates, orbits and invariance checks."""
from dataclasses import dataclass

import numpy as np

from .constants import TOL

GROUP_NAMES = ("D2", "S4", "D2d", "T", "Td", "Z2c")
GROUP_ORDERS = {"D2": 4, "S4": 4, "D2d": 8, "T": 12, "Td": 24, "Z2c": 2}

_ALIASES = {"Z2central": "Z2c", "z2c": "Z2c", "d2": "D2", "s4": "S4",
            "d2d": "D2d", "t": "T", "td": "Td"}

E = np.eye(3, dtype=int)
R23 = np.diag([1, -1, -1])
R13 = np.diag([-1, 1, -1])
R12 = np.diag([-1, -1, 1])
# rotoreflection by a quarter turn about z: R_4 H
S4_GENERATOR = np.array([[0, -1, 0], [1, 0, 0], [0, 0, -1]])
V_REFLECTION = np.diag([1, -1, 1])
CYCLE = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
SWAP_XY = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])

# regular tetrahedron whose rotation group is T in these coordinates
TETRAHEDRON = np.array([[-1, -1, -1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]], dtype=float)


class UnknownGroupError(ValueError):
    pass


def _close(generators):
    """All products of integer generator matrices (breadth first, exact)."""
    elements = [E.copy()]
    seen = {E.tobytes()}
    frontier = [E.copy()]
    while frontier:
        nxt = []
        for h in frontier:
            for g in generators:
                m = g @ h
                key = m.tobytes()
                if key not in seen:
                    seen.add(key)
                    elements.append(m)
                    nxt.append(m)
        frontier = nxt
    return elements


@dataclass(frozen=True)
class SymmetryGroup:
    name: str
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def matrices(self):
        return np.array(self.elements, dtype=float)

    def contains(self, m, tol=1e-12):
        m = np.asarray(m, dtype=float)
        return any(np.max(np.abs(g - m)) <= tol for g in self.matrices)

    def check(self):
        """Orthogonality and closure, raising AssertionError on failure."""
        mats = self.matrices
        for g in mats:
            if np.max(np.abs(g.T @ g - np.eye(3))) > TOL.orthogonality:
                raise AssertionError(f"{self.name}: non-orthogonal element")
        for g in mats:
            for h in mats:
                if not self.contains(g @ h):
                    raise AssertionError(f"{self.name}: not closed under products")
        if not self.contains(np.eye(3)):
            raise AssertionError(f"{self.name}: identity missing")
        return True


def normalize_name(name):
    name = _ALIASES.get(name, name)
    if name not in GROUP_NAMES:
        raise UnknownGroupError(f"unknown group {name!r}; expected one of {GROUP_NAMES}")
    return name


def group(name):
    """Named group with the fixed coordinate conventions used throughout."""
    name = normalize_name(name)
    gens = {
        "D2": [R23, R13],
        "S4": [S4_GENERATOR],
        "D2d": [S4_GENERATOR, V_REFLECTION],
        "T": [R23, R13, CYCLE],
        "Td": [R23, R13, CYCLE, SWAP_XY],
        "Z2c": [-E],
    }[name]
    elements = _close([np.asarray(g, dtype=int) for g in gens])
    G = SymmetryGroup(name, tuple(np.asarray(g, dtype=float) for g in elements))
    assert len(G) == GROUP_ORDERS[name]
    return G


def from_matrices(matrices, name="custom"):
    """Group given by an explicit (closed) list of orthogonal matrices."""
    G = SymmetryGroup(name, tuple(np.asarray(m, dtype=float) for m in matrices))
    G.check()
    return G


def orbit(G, p, tol=TOL.vertex_merge):
    """Images g p for g in G, duplicates within ``tol`` merged (first occurrence kept)."""
    p = np.asarray(p, dtype=float)
    pts = []
    for g in G.matrices:
        q = g @ p
        if all(np.max(np.abs(q - r)) > tol for r in pts):
            pts.append(q)
    return np.array(pts)


def orbit_union(G, points, tol=TOL.vertex_merge):
    out = []
    for p in np.atleast_2d(points):
        for q in orbit(G, p, tol):
            if all(np.max(np.abs(q - r)) > tol for r in out):
                out.append(q)
    return np.array(out)


def fixed_point_set_is_origin(G):
    """True iff the only common fixed vector of G is the origin."""
    stacked = np.vstack([g - np.eye(3) for g in G.matrices])
    return np.linalg.matrix_rank(stacked, tol=1e-9) == 3


def _point_sets_match(A, B, tol):
    if len(A) != len(B):
        return False
    d = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return bool(np.all(d.min(axis=1) <= tol) and np.all(d.min(axis=0) <= tol))


def is_invariant(G, K, tol=1e-9, n_directions=256):
    """Whether gK = K for every g in G.

    Polytopes compare vertex sets; smooth bodies compare gauge values on a
    fixed Fibonacci sample of directions.
    """
    if K.is_polytope:
        V = K.vertices
        scale = max(1.0, float(np.max(np.linalg.norm(V, axis=1))))
        return all(_point_sets_match(V @ g.T, V, tol * scale) for g in G.matrices)
    from .quadrature import fibonacci_sphere
    U = fibonacci_sphere(n_directions)
    base = K.gauge(U)
    return all(np.max(np.abs(K.gauge(U @ g.T) - base)) <= tol for g in G.matrices)
