import math

import numpy as np
import pytest

from mahlerlab import Ellipsoid, ball, smooth_approx
from mahlerlab.equipartition import (d2_ratios, epsilon_for, residual_of, s4_c_beta, s4_g,
                                     solve_d2, solve_s4, winding_number)
from mahlerlab.errors import SolverError
from mahlerlab.fixtures import cube, simplex_d2, simplex_s4

BALL_RATIO = 0.6755108588560399  # arccos(-1/3) / (2 sqrt 2)


def test_ball_closed_forms():
    assert BALL_RATIO == pytest.approx(math.acos(-1 / 3) / (2 * math.sqrt(2)), rel=1e-15)
    assert np.allclose(d2_ratios(ball(), (1, 1, 1)), BALL_RATIO, rtol=1e-13)
    c, beta = s4_c_beta(ball(), 1.0)
    assert c == pytest.approx(math.pi / (3 * math.sqrt(3)), rel=1e-13)
    assert beta == pytest.approx(math.pi / 4, rel=1e-13)
    c, beta = s4_c_beta(ball(), 1 / math.sqrt(2))
    assert c == pytest.approx(BALL_RATIO, rel=1e-13)


def test_winding_number():
    tri = np.array([[0, 0], [1, 0], [0, 1.0]])
    assert winding_number(lambda x: x - 0.2, tri) == 1
    assert winding_number(lambda x: 0.2 - x, tri) == 1
    assert winding_number(lambda x: x[::-1] - 0.2, tri) == -1
    assert winding_number(lambda x: x - 2.0, tri) == 0
    with pytest.raises(SolverError):
        winding_number(lambda x: x - np.array([0.5, 0.0]), tri, max_depth=8)


def test_epsilon_rule():
    assert epsilon_for(1.0) == 2.0 ** -12
    assert epsilon_for(0.5) < epsilon_for(1.0)


@pytest.mark.parametrize("K,want", [
    (ball(), (1, 1, 1)),
    (Ellipsoid(np.diag([2.0, 1.0, 1.0])), (2, 1, 1)),
    (Ellipsoid(np.diag([2.0, 3.0, 1.0])), (2, 3, 1)),
    (simplex_d2(1, 2, 3), (1, 2, 3)),
    (cube(), (1, 1, 1)),
    (smooth_approx(simplex_d2(1, 1, 1), 12), (1, 1, 1)),
], ids=["ball", "ellipsoid211", "ellipsoid231", "simplex123", "cube", "smoothed"])
def test_solve_d2(K, want):
    part = solve_d2(K)
    assert part.residual <= 1e-8
    assert np.allclose(part.p, 3 * np.array(want) / sum(want), rtol=1e-7)
    # a fresh evaluation at the returned parameters agrees
    assert residual_of(d2_ratios(K, part.p)) <= 1e-8


def test_ellipsoid_breaks_ball_partition():
    S = d2_ratios(Ellipsoid(np.diag([2.0, 1.0, 1.0])), (1, 1, 1))
    assert S[1] == pytest.approx(S[2], rel=1e-12)
    assert abs(S[0] - S[1]) > 0.5


def test_solve_s4_ball():
    bal = solve_s4(ball())
    assert bal.u == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    lo, hi = bal.bracket
    assert s4_g(ball(), lo) < 0 < s4_g(ball(), hi)
    # the root lies between 0.5 and 1 with g(0.5) < 0 < g(1)
    assert s4_g(ball(), 0.5) < 0 < s4_g(ball(), 1.0)


@pytest.mark.parametrize("K,u", [(cube(), 2 / 3), (simplex_s4(0.8), 0.8), (simplex_s4(1.0), 1.0),
                                 (simplex_s4(3.0), 3.0)])
def test_solve_s4_polytopes(K, u):
    bal = solve_s4(K)
    assert bal.residual <= 1e-8
    assert bal.u == pytest.approx(u, rel=1e-8)


def test_s4_scale_equivariance():
    # diag(1, 1, t) maps the balance u to t u
    t = 1.7
    bal = solve_s4(Ellipsoid(np.diag([1.0, 1.0, t])))
    assert bal.u == pytest.approx(t / math.sqrt(2), rel=1e-9)
