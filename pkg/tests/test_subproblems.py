"""The certified dual solver against hand-solvable subproblems."""

import numpy as np
import pytest

from modelprox import NonconvexSubproblemError, ball, box, l1, squared_l2, zero
from modelprox.subproblems import (AbsAffinePiece, AbsSymOuterPiece,
                                   HingeAffinePiece, SubproblemSpec,
                                   solve_certified)


def quad_spec(h, center, pieces, reg=None, reg_dim=None, quad=None):
    center = np.asarray(center, dtype=float)
    return SubproblemSpec(dim=center.shape[0], h_iso=h, lin=-h * center,
                          const=0.5 * h * float(center @ center), quad=quad,
                          pieces=pieces, reg=reg, reg_dim=reg_dim)


def test_soft_threshold_smooth_branch():
    # |y| + (1/2)(y-3)^2: minimizer 2, value 2.5
    spec = quad_spec(1.0, [3.0], [AbsAffinePiece(np.array([1.0]), 0.0, 1.0)])
    res = solve_certified(spec, 1e-12)
    assert abs(res.y[0] - 2.0) < 1e-10
    assert abs(res.value - 2.5) < 1e-12
    assert res.gap <= 1e-12


def test_kink_certificate_closes():
    # |y| + (1/2)(y-0.5)^2: minimizer exactly at the kink y=0; a naive
    # last-iterate subgradient certificate cannot close here.
    spec = quad_spec(1.0, [0.5], [AbsAffinePiece(np.array([1.0]), 0.0, 1.0)])
    res = solve_certified(spec, 1e-12)
    assert abs(res.y[0]) < 1e-12
    assert abs(res.value - 0.125) < 1e-12
    assert res.gap <= 1e-12


def test_hinge_piece():
    # max(0, y) + (1/2)(y-1)^2 -> y* = 0 (kink), value 0.5
    spec = quad_spec(1.0, [1.0], [HingeAffinePiece(np.array([1.0]), 0.0, 1.0)])
    res = solve_certified(spec, 1e-12)
    assert abs(res.y[0]) < 1e-10
    assert abs(res.value - 0.5) < 1e-12


def test_abs_quadratic_piece_matches_scan():
    # |y^2 - 1| + 5 (y - 2)^2, the strongly convex prox-point subproblem
    spec = quad_spec(10.0, [2.0], [AbsSymOuterPiece(np.array([1.0]), 1.0, -1.0, 1.0)])
    res = solve_certified(spec, 1e-11)
    ys = np.linspace(-3, 3, 1_200_001)
    vals = np.abs(ys ** 2 - 1) + 5 * (ys - 2.0) ** 2
    k = vals.argmin()
    assert abs(res.y[0] - ys[k]) < 1e-5
    assert abs(res.value - vals[k]) < 1e-9
    assert res.gap <= 1e-11


def test_ball_regularizer_trust_region():
    rng = np.random.default_rng(5)
    Q = rng.normal(size=(3, 3))
    Q = Q @ Q.T + np.eye(3)
    g = rng.normal(size=3)
    spec = SubproblemSpec(dim=3, h_iso=0.0, lin=g, const=0.0, quad=Q,
                          pieces=[], reg=ball(0.5))
    res = solve_certified(spec, 1e-12)
    assert np.linalg.norm(res.y) <= 0.5 + 1e-9
    # projected-gradient optimality check
    grad = Q @ res.y + g
    step = res.y - 0.01 * grad
    if np.linalg.norm(step) > 0.5:
        step = step / np.linalg.norm(step) * 0.5
    val = 0.5 * step @ Q @ step + g @ step
    assert res.value <= val + 1e-9


def test_l1_and_box_isotropic_paths():
    spec = quad_spec(2.0, [1.0, -1.0], [], reg=l1(1.0))
    res = solve_certified(spec, 1e-12)
    assert np.allclose(res.y, [0.5, -0.5])
    spec = quad_spec(2.0, [1.0, -1.0], [], reg=box([-0.25, -0.25], [0.25, 0.25]))
    res = solve_certified(spec, 1e-12)
    assert np.allclose(res.y, [0.25, -0.25])


def test_squared_l2_fold_matches_direct():
    pieces = [AbsAffinePiece(np.array([1.0, -2.0]), 0.3, 1.0)]
    spec = quad_spec(1.0, [2.0, 1.0], list(pieces), reg=squared_l2(3.0))
    res = solve_certified(spec, 1e-12)
    # brute force over a grid
    ys = np.linspace(-2, 3, 901)
    X, Y = np.meshgrid(ys, ys, indexing="ij")
    vals = (np.abs(X - 2 * Y + 0.3) + 0.5 * ((X - 2) ** 2 + (Y - 1) ** 2)
            + 1.5 * (X ** 2 + Y ** 2))
    k = np.unravel_index(vals.argmin(), vals.shape)
    assert res.value <= vals[k] + 1e-9


def test_prefix_slice_regularizer():
    # ball on the first coordinate only (cVaR-style slice)
    spec = quad_spec(1.0, [3.0, 3.0], [], reg=ball(1.0), reg_dim=1)
    res = solve_certified(spec, 1e-12)
    assert np.allclose(res.y, [1.0, 3.0])


def test_nonconvex_margin_rejected():
    # |y^2| piece with curvature 2 against h_iso = 1: margin negative
    spec = quad_spec(1.0, [0.0], [AbsSymOuterPiece(np.array([1.0]), 1.0, -1.0, 1.0)])
    with pytest.raises(NonconvexSubproblemError):
        solve_certified(spec, 1e-10)


def test_no_pieces_exact_solve():
    spec = quad_spec(4.0, [1.0, 2.0], [])
    res = solve_certified(spec, 1e-15)
    assert np.allclose(res.y, [1.0, 2.0])
    assert res.gap == 0.0
