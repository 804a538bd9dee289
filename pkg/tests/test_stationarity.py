import numpy as np
import pytest

import modelprox as mp
from modelprox import problems as pb
from modelprox.rng import RngStream
from modelprox.stationarity import (QuadraticObjective, moreau_envelope,
                                    prox_gradient_mapping)


def abs_instance():
    return mp.lad_instance([[1.0]], [0.0])  # phi(x) = |x|


def test_envelope_of_abs_closed_form():
    # phi = |x|, lam = 1, x = 3: prox point 2, grad norm 1, value 2.5
    rep = moreau_envelope(abs_instance(), mp.zero(), np.array([3.0]), 1.0, 1e-12)
    assert abs(rep.prox_point[0] - 2.0) < 1e-10
    assert abs(rep.grad_norm - 1.0) < 1e-10
    assert abs(rep.envelope_value - 2.5) < 1e-12
    assert rep.inner_suboptimality <= 1e-12


def test_envelope_fixed_point_at_minimizer():
    Q = np.diag([2.0, 0.5])
    quad = QuadraticObjective(Q, np.array([-2.0, 1.0]))
    xstar = np.linalg.solve(Q, [2.0, -1.0])
    rep = moreau_envelope(quad, mp.zero(), xstar, 0.3, 1e-12)
    assert rep.grad_norm < 1e-5


def test_envelope_at_phase_ground_truth_is_stationary():
    rng = RngStream(21, 0)
    prob = mp.generate_phase_retrieval(rng, 4, 12)
    lam = 1.0 / (2.0 * prob.constants.rho)
    rep = moreau_envelope(prob, mp.zero(), prob.ground_truth, lam, 1e-10)
    assert rep.grad_norm < 1e-4
    assert rep.envelope_value < 1e-9


def test_envelope_parameter_validation():
    rng = RngStream(22, 0)
    prob = mp.generate_phase_retrieval(rng, 3, 6)
    bad = 1.0 / prob.constants.rho
    with pytest.raises(mp.InvalidParameterError):
        moreau_envelope(prob, mp.zero(), np.zeros(3), bad, 1e-8)
    with pytest.raises(mp.InvalidParameterError):
        moreau_envelope(prob, mp.zero(), np.zeros(3), 0.01, -1.0)


def test_envelope_unsupported_for_cvar():
    cvar = mp.generate_cvar(RngStream(23, 0), 2, 4, alpha=0.3)
    with pytest.raises(mp.UnsupportedCombinationError):
        moreau_envelope(cvar, mp.zero(), np.zeros(3), 0.5, 1e-8)


def test_gradient_identity_by_finite_differences():
    # finite differences of the numerically evaluated envelope match
    # (x - xhat)/lam to 1e-3 (h = 1e-4, inner tol 1e-10)
    rng = RngStream(24, 0)
    prob = mp.generate_lad(rng, 3, 8)
    lam = 0.7
    h = 1e-4
    for _ in range(20):
        x = 2.0 * rng.standard_normal(3)
        rep = moreau_envelope(prob, mp.zero(), x, lam, 1e-10)
        grad = (x - rep.prox_point) / lam
        fd = np.zeros(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            up = moreau_envelope(prob, mp.zero(), x + e, lam, 1e-10)
            dn = moreau_envelope(prob, mp.zero(), x - e, lam, 1e-10)
            fd[k] = (up.envelope_value - dn.envelope_value) / (2 * h)
        assert np.max(np.abs(fd - grad)) < 1e-3


def test_near_stationarity_triple():
    rng = RngStream(25, 0)
    prob = mp.generate_phase_retrieval(rng, 3, 9)
    lam = 1.0 / (2.0 * prob.constants.rho)
    tol = 1e-10
    for _ in range(10):
        x = rng.standard_normal(3)
        rep = moreau_envelope(prob, mp.zero(), x, lam, tol)
        assert abs(np.linalg.norm(rep.prox_point - x) - lam * rep.grad_norm) < 1e-12
        assert (mp.objective_value(prob, rep.prox_point)
                <= mp.objective_value(prob, x) + tol)


def test_near_stationarity_subdifferential_distance_one_dim():
    # dist(0, dphi(xhat)) <= grad_norm + tol, checked in 1-d where the
    # subdifferential of |a x - b| sums of intervals is enumerable
    prob = mp.lad_instance([[1.0], [2.0]], [0.0, 1.0])
    lam = 0.4
    tol = 1e-11
    rng = RngStream(26, 0)
    for _ in range(20):
        x = 3.0 * rng.standard_normal(1)
        rep = moreau_envelope(prob, mp.zero(), x, lam, tol)
        xh = rep.prox_point[0]
        # subdifferential of (|x| + |2x-1|)/2 at xh
        terms = []
        for a, b in ((1.0, 0.0), (2.0, 1.0)):
            r = a * xh - b
            if abs(r) < 1e-9:
                terms.append((-abs(a) / 2, abs(a) / 2))
            else:
                g = a * np.sign(r) / 2
                terms.append((g, g))
        lo = sum(t[0] for t in terms)
        hi = sum(t[1] for t in terms)
        dist = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
        assert dist <= rep.grad_norm + 1e-6


def test_prox_gradient_mapping_examples():
    quad = QuadraticObjective(np.eye(2), np.zeros(2))  # f = ||x||^2 / 2
    x = np.array([0.7, -0.2])
    assert np.allclose(prox_gradient_mapping(quad, mp.zero(), x, 1.0), x)
    # inactive ball constraint: mapping equals the gradient
    g = prox_gradient_mapping(quad, mp.ball(10.0), x, 0.5)
    assert np.allclose(g, quad.gradient(x))
    # stationary point of f + indicator: mapping vanishes
    assert np.allclose(prox_gradient_mapping(quad, mp.ball(1.0),
                                             np.zeros(2), 0.5), 0.0)


def test_proportionality_of_stationarity_measures():
    # (1/4)||grad phi_{1/2rho}|| <= ||G_{1/rho}|| <=
    # (3/2)(1+1/sqrt(2)) ||grad phi_{1/2rho}|| on a smooth
    # quadratic-plus-ball instance
    rng = np.random.default_rng(314)
    M = rng.normal(size=(3, 3))
    Q = M @ M.T / 3.0 + 0.2 * np.eye(3)
    quad = QuadraticObjective(Q, rng.normal(size=3))
    rho = quad.grad_lipschitz
    reg = mp.ball(1.5)
    hi_c = 1.5 * (1 + 1 / np.sqrt(2))
    for _ in range(30):
        x = reg.prox(rng.normal(size=3) * 1.5, 1.0)
        env = moreau_envelope(quad, reg, x, 1.0 / (2 * rho), 1e-12)
        gmap = np.linalg.norm(prox_gradient_mapping(quad, reg, x, 1.0 / rho))
        assert 0.25 * env.grad_norm <= gmap + 1e-4
        assert gmap <= hi_c * env.grad_norm + 1e-4
