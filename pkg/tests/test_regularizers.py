import numpy as np
import pytest

from modelprox import (DimensionMismatchError, InvalidParameterError,
                       Regularizer, ball, box, l1, squared_l2, zero)


def test_value_examples():
    assert ball(1.0).value([0.5, 0.0]) == 0.0
    assert ball(1.0).value([3.0, 4.0]) == np.inf
    assert l1(2.0).value([1.0, -1.0]) == 4.0
    assert zero().value([7.0]) == 0.0
    assert squared_l2(3.0).value([2.0]) == 6.0


def test_box_value_and_infinite_bounds():
    r = box([-1.0, -np.inf], [1.0, np.inf])
    assert r.value([0.5, 100.0]) == 0.0
    assert r.value([2.0, 0.0]) == np.inf


def test_prox_examples():
    x = np.array([0.3, -0.2])
    assert np.array_equal(zero().prox(x, 2.0), x)
    assert np.allclose(ball(1.0).prox(np.array([3.0, 4.0]), 0.5), [0.6, 0.8])
    assert np.allclose(l1(1.0).prox(np.array([1.5]), 1.0), [0.5])
    assert np.allclose(squared_l2(3.0).prox(np.array([4.0]), 1.0), [1.0])
    assert np.allclose(box([-1.0], [1.0]).prox(np.array([5.0]), 1.0), [1.0])


def test_prox_step_must_be_positive():
    with pytest.raises(InvalidParameterError):
        zero().prox(np.array([1.0]), 0.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        box([-1.0], [1.0]).value(np.array([1.0, 2.0]))


def test_invalid_construction():
    with pytest.raises(InvalidParameterError):
        ball(0.0)
    with pytest.raises(InvalidParameterError):
        box([1.0], [0.0])
    with pytest.raises(InvalidParameterError):
        l1(-1.0)
    with pytest.raises(InvalidParameterError):
        Regularizer("huber")


def all_kinds(dim):
    return [zero(), ball(1.3), box(-np.ones(dim), np.ones(dim)),
            l1(0.7), squared_l2(2.0)]


def test_prox_nonexpansive_on_random_pairs():
    rng = np.random.default_rng(99)
    for reg in all_kinds(5):
        for _ in range(1000):
            x = rng.normal(size=5) * 2
            y = rng.normal(size=5) * 2
            step = 0.1 + rng.random()
            lhs = np.linalg.norm(reg.prox(x, step) - reg.prox(y, step))
            assert lhs <= np.linalg.norm(x - y) * (1 + 1e-12) + 1e-14


def test_prox_optimality_against_random_candidates():
    # prox output must beat 1e3 random candidates (plus 1e-10 slack) on
    # the defining subproblem r(y) + (1/2a)||y - x||^2.
    rng = np.random.default_rng(123)
    for reg in all_kinds(4):
        x = rng.normal(size=4) * 2
        step = 0.7
        p = reg.prox(x, step)
        best = reg.value(p) + np.sum((p - x) ** 2) / (2 * step)
        for _ in range(1000):
            cand = rng.normal(size=4) * 2
            if not np.isfinite(reg.value(cand)):
                cand = reg.prox(cand, step)  # pull indicators feasible
            val = reg.value(cand) + np.sum((cand - x) ** 2) / (2 * step)
            assert best <= val + 1e-10


def test_strong_convexity_modulus():
    assert squared_l2(2.5).mu == 2.5
    assert ball(1.0).mu == 0.0


def test_config_round_trip():
    for reg in all_kinds(3):
        back = Regularizer.from_config(reg.to_config())
        assert back.kind == reg.kind
        x = np.array([0.4, -2.0, 0.9])
        assert back.value(x) == reg.value(x)
        assert np.array_equal(back.prox(x, 0.3), reg.prox(x, 0.3))
