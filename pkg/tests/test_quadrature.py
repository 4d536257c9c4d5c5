import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mahlerlab.quadrature import (QuadratureError, fibonacci_sphere, icosahedron, integrate,
                                  integrate_sphere, integrate_sphere_triangles)


def test_interval_rules():
    assert integrate(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-14)
    v = integrate(lambda t: np.column_stack([t, t * t]), 0.0, 1.0)
    assert np.allclose(v, [0.5, 1 / 3], atol=1e-15)
    # sharp peak of width 1e-4
    got = integrate(lambda t: 1.0 / (t * t + 1e-8), -1.0, 1.0)
    assert got == pytest.approx(2e4 * math.atan(1e4), rel=1e-11)


def test_interval_cap():
    with pytest.raises(QuadratureError):
        integrate(lambda t: np.sign(np.sin(1e6 * t)) / np.sqrt(np.abs(t) + 1e-300), -1, 1,
                  max_panels=50)


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4))
def test_sphere_monomials(i, j, k):
    # int x^i y^j z^k over S^2 (zero unless all even)
    got = integrate_sphere(lambda U: U[:, 0] ** i * U[:, 1] ** j * U[:, 2] ** k, rtol=1e-12,
                           atol=1e-12)
    if i % 2 or j % 2 or k % 2:
        want = 0.0
    else:
        b = [(p + 1) / 2 for p in (i, j, k)]
        want = 2 * math.prod(math.gamma(t) for t in b) / math.gamma(sum(b))
    assert got == pytest.approx(want, abs=1e-11)


def test_octant_solid_angle():
    tri = np.eye(3)[None]
    assert integrate_sphere_triangles(lambda U: np.ones(len(U)), tri) == pytest.approx(math.pi / 2)


def test_icosahedron_and_fibonacci():
    T = icosahedron()
    normals = np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0])
    assert np.all(np.einsum("ij,ij->i", normals, T.mean(axis=1)) > 0)
    U = fibonacci_sphere(500)
    assert np.allclose(np.linalg.norm(U, axis=1), 1.0)
    assert np.linalg.norm(U.mean(axis=0)) < 1e-2
