"""Real-root extraction for quartic (and lower-degree) polynomials.

The solver builds the companion matrix of the monic polynomial, takes its
eigenvalues, polishes each with iterated Newton steps in complex
arithmetic, and discards roots whose polished imaginary part exceeds
``1e-7 * (1 + |root|)``.  The polish step matters near multiple roots:
raw companion eigenvalues of a triple root sit on a circle of radius
about ``eps**(1/3)`` in the complex plane, and only after polishing do
they collapse onto the real axis.  Repeated roots are reported as
repeated entries (multiplicity by repetition), sorted ascending.
"""

import numpy as np

from .errors import DegeneratePolynomialError, InvalidParameterError

__all__ = ["quartic_real_roots", "polyval_with_derivative"]

IMAG_DISCARD_REL = 1e-7
_NEWTON_STEPS = 60


def polyval_with_derivative(coeffs, x):
    """Evaluate ``p(x)`` and ``p'(x)`` by a single Horner pass.

    ``coeffs`` are ordered highest degree first.
    """
    p = coeffs[0]
    dp = 0.0 * x
    for c in coeffs[1:]:
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _newton_polish(coeffs, z):
    """Iterated Newton refinement of a (possibly complex) root estimate.

    Termination is on step size, not residual: near a root of
    multiplicity k the residual is O(dist^k) and underflows while the
    estimate is still far off, whereas the Newton step keeps shrinking
    by the factor (k-1)/k until the estimate converges.
    """
    for _ in range(_NEWTON_STEPS):
        p, dp = polyval_with_derivative(coeffs, z)
        if dp == 0.0:
            break
        step = p / dp
        z = z - step
        if abs(step) <= 1e-16 * (1.0 + abs(z)):
            break
    return z


def quartic_real_roots(coeffs):
    """All real roots of a polynomial with coefficients ``c4..c0``.

    Parameters
    ----------
    coeffs : array_like
        Five coefficients ordered highest degree first.  A zero leading
        coefficient triggers a degree-reduced solve; the all-zero
        polynomial raises :class:`DegeneratePolynomialError`.

    Returns
    -------
    ndarray
        Real roots sorted ascending, one entry per multiplicity.  Each
        reported root ``r`` satisfies ``|p(r)| <= 1e-8 * (1 + max|c|)``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size != 5:
        raise InvalidParameterError("expected five coefficients c4..c0")
    if not np.all(np.isfinite(c)):
        raise InvalidParameterError("coefficients must be finite")
    nonzero = np.flatnonzero(c != 0.0)
    if nonzero.size == 0:
        raise DegeneratePolynomialError("all coefficients are zero")
    c = c[nonzero[0]:]
    degree = c.size - 1
    if degree == 0:
        return np.empty(0)
    monic = c / c[0]
    if degree == 1:
        return np.array([-monic[1]])

    companion = np.zeros((degree, degree))
    companion[0, :] = -monic[1:]
    idx = np.arange(degree - 1)
    companion[idx + 1, idx] = 1.0
    eigs = np.linalg.eigvals(companion)

    roots = []
    for z in eigs:
        z = _newton_polish(monic, complex(z))
        if abs(z.imag) > IMAG_DISCARD_REL * (1.0 + abs(z)):
            continue
        r = float(_newton_polish(monic, z.real).real)
        roots.append(r + 0.0)
    return np.sort(np.array(roots))
