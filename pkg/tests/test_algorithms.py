import numpy as np
import pytest

import modelprox as mp
from modelprox.algorithms import (make_schedule, run_model_based, run_psg,
                                  select_iterate, weighted_average)
from modelprox.models import ModelFamily
from modelprox.rng import RngStream


def test_constant_alpha_schedule_formula():
    s = make_schedule("constant-alpha", T=3, gamma=1.0)
    assert np.allclose(s.alphas, 0.5)
    assert np.allclose(s.weights, 0.25)


def test_strongly_convex_schedule_formula():
    s = make_schedule("strongly-convex", T=4, mu=2.0)
    assert np.allclose(s.betas, [1.0, 2.0, 3.0, 4.0, 5.0])
    # Algorithm-2 selection weights are strictly decreasing
    assert np.all(np.diff(s.weights) < 0)


def test_constant_beta_schedule_uniform_weights():
    s = make_schedule("constant-beta", T=9, gamma=0.5, rho_bar=3.0)
    assert np.allclose(s.betas, 3.0 + np.sqrt(10.0) / 0.5)
    assert np.allclose(s.weights, 0.1)


def test_schedule_errors():
    with pytest.raises(mp.InvalidParameterError):
        make_schedule("constant-alpha", T=0, gamma=1.0)
    with pytest.raises(mp.InvalidParameterError):
        make_schedule("constant-alpha", T=3, gamma=-1.0)
    with pytest.raises(mp.InvalidParameterError):
        make_schedule("strongly-convex", T=3, mu=0.0)
    with pytest.raises(mp.InvalidParameterError):
        make_schedule("constant-beta", T=3, gamma=1.0, rho_bar=0.5, tau=1.0)


def one_d_abs_problem():
    # f(x) = |x| as a single-datum LAD instance
    return mp.lad_instance([[1.0]], [0.0])


def test_psg_hand_trajectory_on_abs():
    # alpha = 0.5 from x0 = 1: iterates 1, 0.5, 0, 0, ... (tie convention
    # gives subgradient 0 at the origin)
    prob = one_d_abs_problem()
    sched = make_schedule("custom", T=4, alphas=np.full(5, 0.5))
    rec = run_psg(prob, mp.zero(), sched, np.array([1.0]), RngStream(1, 0),
                  retain_trajectory=True)
    assert np.allclose(rec.trajectory.ravel(), [1.0, 0.5, 0.0, 0.0, 0.0, 0.0])


def test_model_based_proxpoint_soft_threshold_on_abs():
    prob = one_d_abs_problem()
    sched = make_schedule("custom", T=1, betas=np.array([1.0, 1.0]))
    rec = run_model_based(prob, mp.zero(), ModelFamily.PROX_POINT, sched,
                          np.array([1.0]), RngStream(1, 0),
                          retain_trajectory=True)
    assert rec.trajectory[1][0] == 0.0


def test_feasibility_with_indicator_regularizer():
    rng = RngStream(3, 0)
    prob = mp.generate_phase_retrieval(rng, 4, 8)
    sched = make_schedule("constant-alpha", T=60, gamma=0.02)
    rec = run_psg(prob, mp.ball(1.0), sched, mp.unit_sphere_point(rng, 4),
                  RngStream(3, 5), retain_trajectory=True)
    norms = np.linalg.norm(rec.trajectory, axis=1)
    assert np.all(norms <= 1.0 + 1e-12)


def test_identical_seeds_identical_records():
    rng = RngStream(5, 0)
    prob = mp.generate_phase_retrieval(rng, 4, 8)
    x0 = mp.unit_sphere_point(rng, 4)
    sched = make_schedule("constant-alpha", T=40, gamma=0.05)
    a = run_psg(prob, mp.zero(), sched, x0, RngStream(9, 77), allow_large_gamma=True)
    b = run_psg(prob, mp.zero(), sched, x0, RngStream(9, 77), allow_large_gamma=True)
    assert a.t_star == b.t_star
    assert np.array_equal(a.x_star, b.x_star)
    assert np.array_equal(a.objective_per_epoch, b.objective_per_epoch)


def test_linear_family_bitwise_equals_psg():
    rng = RngStream(6, 0)
    prob = mp.generate_phase_retrieval(rng, 4, 8)
    x0 = mp.unit_sphere_point(rng, 4)
    betas = np.full(41, 25.0)
    sched = make_schedule("custom", T=40, betas=betas)
    for reg in (mp.zero(), mp.ball(1.0), mp.l1(0.1)):
        a = run_psg(prob, reg, sched, x0, RngStream(4, 11),
                    retain_trajectory=True)
        b = run_model_based(prob, reg, ModelFamily.LINEAR, sched, x0,
                            RngStream(4, 11), retain_trajectory=True)
        assert np.array_equal(a.trajectory, b.trajectory)
        assert a.t_star == b.t_star
        assert np.array_equal(a.x_star, b.x_star)


def test_epoch_snapshots_and_objective_length():
    rng = RngStream(7, 0)
    prob = mp.generate_phase_retrieval(rng, 3, 5)
    epochs = 4
    sched = make_schedule("constant-alpha", T=epochs * prob.m - 1, gamma=0.05)
    rec = run_psg(prob, mp.zero(), sched, mp.unit_sphere_point(rng, 3),
                  RngStream(7, 1), allow_large_gamma=True)
    assert len(rec.objective_per_epoch) == epochs + 1
    assert rec.snapshot_steps[0] == 0 and rec.snapshot_steps[-1] == epochs * prob.m


def test_diverged_run_carries_step_index():
    prob = mp.phase_instance([[1.0]], [1.0])
    sched = make_schedule("custom", T=50, alphas=np.full(51, 1e6))
    with pytest.raises(mp.DivergedRunError) as err:
        run_psg(prob, mp.zero(), sched, np.array([2.0]), RngStream(1, 1))
    assert err.value.step >= 0


def test_large_gamma_warns_unless_overridden():
    rng = RngStream(8, 0)
    prob = mp.generate_phase_retrieval(rng, 3, 5)
    sched = make_schedule("constant-alpha", T=5, gamma=1.0)
    with pytest.warns(UserWarning):
        run_psg(prob, mp.zero(), sched, np.zeros(3), RngStream(8, 1))
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        run_psg(prob, mp.zero(), sched, np.zeros(3), RngStream(8, 1),
                allow_large_gamma=True)


def test_select_iterate_distribution():
    rng = RngStream(10, 0)
    traj = np.arange(8.0).reshape(4, 2)
    w = np.array([0.4, 0.3, 0.2, 0.1])
    draws = np.array([select_iterate(traj, w, rng)[0] for _ in range(100_000)])
    freq = np.bincount(draws, minlength=4) / 100_000
    sigma = np.sqrt(w * (1 - w) / 100_000)
    assert np.all(np.abs(freq - w) <= 3.5 * sigma)
    # degenerate weight returns the final iterate
    t, x = select_iterate(traj, np.array([0.0, 0.0, 0.0, 1.0]), rng)
    assert t == 3 and np.array_equal(x, traj[3])
    with pytest.raises(mp.InvalidParameterError):
        select_iterate(np.empty((0, 2)), np.array([1.0]), rng)


def test_weighted_average_formulas():
    rng = RngStream(11, 0)
    prob = one_d_abs_problem()
    sched = make_schedule("strongly-convex", T=1, mu=2.0)
    rec = run_model_based(prob, mp.zero(), ModelFamily.PROX_POINT, sched,
                          np.array([1.0]), RngStream(11, 2),
                          retain_trajectory=True)
    avg = weighted_average(rec, "strongly-convex")
    want = 0.4 * rec.trajectory[1] + 0.6 * rec.trajectory[2]
    assert np.allclose(avg, want)
    sched_u = make_schedule("constant-alpha", T=3, gamma=0.3)
    rec_u = run_psg(prob, mp.zero(), sched_u, np.array([1.0]), RngStream(11, 3),
                    retain_trajectory=True)
    avg_u = weighted_average(rec_u, "uniform")
    assert np.allclose(avg_u, rec_u.trajectory[1:5].mean(axis=0))


def test_weighted_average_requires_trajectory():
    prob = one_d_abs_problem()
    sched = make_schedule("constant-alpha", T=3, gamma=0.3)
    rec = run_psg(prob, mp.zero(), sched, np.array([1.0]), RngStream(12, 0))
    with pytest.raises(mp.TrajectoryNotRetainedError):
        weighted_average(rec, "uniform")
