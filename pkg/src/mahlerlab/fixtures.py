"""Named bodies used as extremal cases and test fixtures."""
import itertools

import numpy as np

from .body import Polytope, ball  # noqa: F401  (ball re-exported)
from .groups import TETRAHEDRON


def d2_vertices(p):
    """v---, v-++, v+-+, v++- for p = (a, b, c)."""
    a, b, c = (float(t) for t in p)
    return np.array([[-a, -b, -c], [-a, b, c], [a, -b, c], [a, b, -c]])


def s4_vertices(u):
    """v_k = g^k (1, 0, u) for k = 0..3."""
    u = float(u)
    return np.array([[1.0, 0.0, u], [0.0, 1.0, -u], [-1.0, 0.0, u], [0.0, -1.0, -u]])


def simplex_d2(a=1.0, b=1.0, c=1.0):
    return Polytope.from_vertices(d2_vertices((a, b, c)))


def simplex_s4(u=1.0):
    return Polytope.from_vertices(s4_vertices(u))


def regular_simplex():
    return Polytope.from_vertices(TETRAHEDRON)


def cube(s=1.0):
    return Polytope.from_vertices(s * np.array(list(itertools.product([-1.0, 1.0], repeat=3))))


def octahedron(s=1.0):
    return Polytope.from_vertices(s * np.vstack([np.eye(3), -np.eye(3)]))
