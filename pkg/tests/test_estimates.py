import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mahlerlab import ball, estimates, smooth_approx
from mahlerlab.cli import _simplex_pairs
from mahlerlab.errors import PreconditionError
from mahlerlab.fixtures import cube, d2_vertices, simplex_d2
from mahlerlab.hull import fan_area, hull2d, polygon_arc
from mahlerlab.planar import polar_polygon

J = np.array([[0.0, -1.0], [1.0, 0.0]])
seeds = st.integers(0, 2 ** 32 - 1)


def _arc_area(poly, a, b):
    return fan_area(polygon_arc(poly, a, b))


def _random_polygon(rng, n=9):
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    P = rng.uniform(0.4, 2.0, n)[:, None] * np.column_stack([np.cos(th), np.sin(th)])
    P = np.vstack([P, 0.3 * np.array([[1, 0], [0, 1], [-1, 0], [0, -1.0]])])
    return P[hull2d(P)]


def _boundary(poly, d):
    # the polygon's boundary point on the ray through d
    Q = polar_polygon(poly)
    return d / np.max(Q @ d)


@given(seeds)
def test_pairing_2d_random_polygons(seed):
    rng = np.random.default_rng(seed)
    K = _random_polygon(rng)
    Kp = polar_polygon(K)
    d = rng.normal(size=(4, 2))
    a, b = _boundary(K, d[0]), _boundary(K, d[1])
    a0, b0 = _boundary(Kp, d[2]), _boundary(Kp, d[3])
    if np.allclose(a, b) or np.allclose(a0, b0):
        return
    rep = estimates.pairing_2d(_arc_area(K, a, b), _arc_area(Kp, a0, b0), a, b, a0, b0)
    assert rep.slack >= -1e-12


@given(seeds)
def test_pairing_2d_equality_case(seed):
    # square with a = e1, b = e2, corner c = (1, 1); the polar arc runs e1, c°, e2
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2))
    if abs(np.linalg.det(A)) < 0.1:
        return
    if np.linalg.det(A) < 0:
        A = A[:, ::-1]
    B = np.linalg.inv(A).T
    sq = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1.0]])
    K, Kp = sq @ A.T, polar_polygon(sq) @ B.T
    e1, e2 = np.eye(2)
    a, b, a0, b0 = A @ e1, A @ e2, B @ e1, B @ e2
    L, Lp = _arc_area(K, a, b), _arc_area(Kp, a0, b0)
    rep = estimates.pairing_2d(L, Lp, a, b, a0, b0)
    assert abs(rep.slack) <= 1e-9 * max(1.0, rep.rhs)
    # the witnesses of the equality case
    c, c0 = J @ (a0 - b0) / (2 * Lp), J @ (a - b) / (2 * L)
    assert np.allclose(c, A @ (1, 1)) and c @ c0 == pytest.approx(1.0)
    # a reciprocal rescaling of the two sides keeps the slack
    scaled = estimates.pairing_2d(4 * L, Lp / 4, 2 * a, 2 * b, a0 / 2, b0 / 2)
    assert scaled.slack == pytest.approx(rep.slack, abs=1e-12)


def test_pairing_2d_disk_example():
    rep = estimates.pairing_2d(math.pi / 4, math.pi / 4, (1, 0), (0, 1), (1, 0), (0, 1))
    assert rep.slack == pytest.approx(math.pi ** 2 / 16 - 0.5)
    with pytest.raises(PreconditionError):
        estimates.pairing_2d(1, 1, (1, 0), (1, 0), (1, 0), (0, 1))


def test_pairing_curve():
    rep = estimates.pairing_curve(ball(), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    assert rep.slack == pytest.approx(math.pi ** 2 / 16 - 0.5, abs=1e-10)
    K = smooth_approx(simplex_d2(1, 1, 1), 12)
    _, _, vpmp, vppm = d2_vertices((1, 1, 1))
    rep = estimates.pairing_curve(K, K.boundary_point(vpmp), K.boundary_point(vppm))
    assert rep.slack >= -1e-6
    a = K.boundary_point((1, 0.3, 0.1))
    b = K.boundary_point((1, 0.3001, 0.1))
    assert estimates.pairing_curve(K, a, b).slack >= -1e-9
    with pytest.raises(PreconditionError):
        estimates.pairing_curve(K, 2 * a, b)
    with pytest.raises(PreconditionError):
        estimates.pairing_curve(cube(), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))


def test_surface_estimate_ball_and_simplex():
    rep = estimates.surface_estimate(ball(), np.eye(3))
    assert rep.slack == pytest.approx(math.pi ** 2 / 36 - math.pi ** 2 / 48, abs=1e-9)
    rep = estimates.surface_estimate(ball(), np.eye(3), np.eye(3))
    assert rep.slack == pytest.approx(math.pi ** 2 / 36 - math.pi ** 2 / 48, abs=1e-6)
    for p in ((1, 1, 1), (1, 2, 3), (0.3, 4, 1)):
        V = d2_vertices(p)[1:]
        rep = estimates.surface_estimate(simplex_d2(*p), V, V / (3 * np.square(p)))
        assert rep.lhs == pytest.approx(4 / 9) and abs(rep.slack) <= 1e-12


def test_surface_estimate_scaling():
    K = smooth_approx(cube(), 8)
    gens = [(1, 0.2, 0.1), (0.1, 1, 0.3), (0.2, 0.1, 1)]
    s = estimates.surface_estimate(K, gens).slack
    assert estimates.surface_estimate(K.scaled(2.5), gens).slack == pytest.approx(s, abs=1e-9)
    with pytest.raises(PreconditionError):
        estimates.surface_estimate(cube(), gens)


def test_cone_pair_2d_equality_and_rotation():
    for p in ((1, 1, 1), (1, 2, 3), (4, 0.5, 2)):
        K = simplex_d2(*p)
        a, b, a0, b0 = _simplex_pairs(K)
        rep = estimates.cone_pair_2d(K, a, b, a0, b0)
        assert abs(rep.slack) <= 1e-12
        rot, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)))
        if np.linalg.det(rot) < 0:
            rot = -rot
        KR = K.transformed(rot)
        rr = estimates.cone_pair_2d(KR, rot @ a, rot @ b, rot @ a0, rot @ b0)
        assert rr.lhs == pytest.approx(rep.lhs, abs=1e-10)
        assert rr.rhs == pytest.approx(rep.rhs, abs=1e-10)
    rep = estimates.cone_pair_2d(ball(), np.eye(3)[0], np.eye(3)[1], np.eye(3)[0], np.eye(3)[1])
    assert rep.slack == pytest.approx(math.pi ** 2 / 16 - 0.5, abs=1e-9)


def test_cone_pair_2d_preconditions():
    K = simplex_d2(1, 1, 1)
    a, b, a0, b0 = _simplex_pairs(K)
    with pytest.raises(PreconditionError):
        estimates.cone_pair_2d(K, a, b, a0, b0 * (1 - 1e-3))
    with pytest.raises(PreconditionError):
        estimates.cone_pair_2d(K, a, b, a0, a0)


def test_section_pairing():
    K = simplex_d2(1, 2, 3)
    a, b, _, _ = _simplex_pairs(K)
    assert abs(estimates.section_pairing(K, a, b).slack) <= 1e-12
    C = cube()
    rep = estimates.section_pairing(C, C.boundary_point((1, -0.2, 0.3)),
                                    C.boundary_point((-0.1, 1, 0.5)))
    assert rep.slack >= -1e-8
    rep = estimates.section_pairing(ball(), np.eye(3)[0], np.eye(3)[1])
    assert rep.slack == pytest.approx(math.pi ** 2 / 16 - 0.5, abs=1e-9)
