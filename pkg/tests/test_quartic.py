import numpy as np
import pytest

from modelprox import DegeneratePolynomialError, quartic_real_roots
from modelprox.quartic import polyval_with_derivative


def residual_bound(coeffs):
    return 1e-8 * (1.0 + float(np.max(np.abs(coeffs))))


def test_symmetric_quartic():
    roots = quartic_real_roots([1, 0, 0, 0, -1])
    assert np.allclose(roots, [-1.0, 1.0])


def test_quadruple_root_at_zero():
    roots = quartic_real_roots([1, 0, 0, 0, 0])
    assert roots.shape == (4,)
    assert np.all(np.abs(roots) < 1e-8)


def test_triple_root_instance():
    # eta^4 - 2 eta^3 + 2 eta - 1 = (eta - 1)^3 (eta + 1): the boundary
    # quartic of the 1-d bilinear subproblem with u=v=(1), x0=y0=2, b=1.
    coeffs = [1.0, -2.0, 0.0, 2.0, -1.0]
    roots = quartic_real_roots(coeffs)
    assert roots.shape == (4,)
    # a triple root is conditioned like eps**(1/3); 5e-6 absolute is the
    # attainable accuracy, while residuals stay far below the bound
    assert abs(roots[0] + 1.0) < 1e-10
    assert np.all(np.abs(roots[1:] - 1.0) < 5e-6)
    for r in roots:
        p, _ = polyval_with_derivative(coeffs, r)
        assert abs(p) <= residual_bound(coeffs)
    # independent companion-matrix oracle: numpy's own eigenvalue route
    oracle = np.roots(coeffs)
    oracle = np.sort(oracle.real[np.abs(oracle.imag) < 1e-5])
    assert np.allclose(np.sort(roots), oracle, atol=1e-4)


def test_no_real_roots():
    assert quartic_real_roots([1, 0, 0, 0, 1]).size == 0


def test_degree_fallbacks():
    assert np.allclose(quartic_real_roots([0, 0, 0, 2, -4]), [2.0])
    assert np.allclose(quartic_real_roots([0, 0, 1, 0, -4]), [-2.0, 2.0])
    assert np.allclose(quartic_real_roots([0, 1, 0, -1, 0]), [-1.0, 0.0, 1.0])
    assert quartic_real_roots([0, 0, 0, 0, 3.5]).size == 0


def test_all_zero_polynomial_rejected():
    with pytest.raises(DegeneratePolynomialError):
        quartic_real_roots([0, 0, 0, 0, 0])


def test_planted_root_completeness():
    # 1e4 random quartics built from planted real roots: every root
    # recovered within 1e-6 relative error.
    rng = np.random.default_rng(314159)
    for _ in range(10_000):
        planted = np.sort(rng.uniform(-2.0, 2.0, size=4))
        coeffs = np.poly(planted)
        got = quartic_real_roots(coeffs)
        assert got.shape == (4,)
        rel = np.abs(got - planted) / (1.0 + np.abs(planted))
        assert rel.max() < 1e-6, f"planted {planted} got {got}"
        for r in got:
            p, _ = polyval_with_derivative(coeffs, r)
            assert abs(p) <= residual_bound(coeffs)


def test_reported_roots_sorted_ascending():
    rng = np.random.default_rng(7)
    for _ in range(100):
        c = rng.normal(size=5)
        c[0] = c[0] if abs(c[0]) > 0.1 else 1.0
        roots = quartic_real_roots(c)
        assert np.all(np.diff(roots) >= 0)
