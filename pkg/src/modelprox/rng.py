"""Deterministic seeded randomness.

All stochastic draws in the package go through :class:`RngStream`, a thin
wrapper around the counter-based Philox bit generator keyed by
``(seed, stream_id)``.  Distinct stream ids give statistically independent
sequences without any coordination, so every cell of a parameter sweep can
own its stream and be reproduced in isolation.

Gaussian variates are produced by inverse-CDF transform of 53-bit uniforms
(``scipy.special.ndtri``), fixed here once: byte-level reproducibility of
the experiments depends on the sampler never changing.
"""

import numpy as np
from scipy.special import ndtri

from .errors import InvalidParameterError

__all__ = ["RngStream", "gaussian_vector", "unit_sphere_point"]

_INV_2_53 = 2.0 ** -53


class RngStream:
    """A single-owner stream of random draws.

    Parameters
    ----------
    seed : int
        64-bit master seed.
    stream_id : int
        64-bit stream index; one independent stream per (method,
        step-size, round) cell of an experiment.

    Identical ``(seed, stream_id)`` reproduce the identical sequence of
    draws as long as the calling sequence is identical.  The stream is
    mutable and must not be shared between concurrent consumers.
    """

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)
        self._gen = np.random.Generator(self._bitgen)

    def spawn(self, stream_id):
        """A fresh independent stream under the same seed."""
        return RngStream(self.seed, stream_id)

    def uniform_open(self, n):
        """``n`` uniforms on the open interval (0, 1), 53-bit resolution."""
        raw = self._bitgen.random_raw(int(n))
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def standard_normal(self, n):
        """``n`` i.i.d. standard normals via inverse-CDF transform."""
        if n == 0:
            return np.empty(0)
        return ndtri(self.uniform_open(n))

    def integers(self, high, size=None):
        """Uniform integers on ``[0, high)`` (Lemire bounded draw)."""
        return self._gen.integers(0, high, size=size)

    def categorical(self, weights):
        """One index drawn from a normalized discrete distribution."""
        w = np.asarray(weights, dtype=float)
        cdf = np.cumsum(w)
        cdf /= cdf[-1]
        u = self.uniform_open(1)[0]
        return int(np.searchsorted(cdf, u, side="left"))


def gaussian_vector(rng, d):
    """A vector of ``d`` i.i.d. standard normal entries.

    ``d = 0`` returns an empty vector.  The stream advances
    deterministically by exactly ``d`` raw draws.
    """
    if d < 0:
        raise InvalidParameterError("dimension must be nonnegative")
    return rng.standard_normal(int(d))


def unit_sphere_point(rng, d):
    """A point drawn uniformly on the unit sphere in R^d.

    Raises for ``d = 0`` since the empty vector cannot be normalized.
    """
    if d < 1:
        raise InvalidParameterError("unit sphere requires dimension >= 1")
    while True:
        g = rng.standard_normal(int(d))
        norm = float(np.linalg.norm(g))
        if norm > 0.0:
            x = g / norm
            # One re-normalization pass pins the norm to 1 within 1e-12.
            return x / np.linalg.norm(x)
