"""Closed regularizers with exact values and exact proximal maps.

Every shipped kind admits a closed-form proximal map

    prox_{a r}(x) = argmin_y { r(y) + (1/2a) ||y - x||^2 },

which is what the model-based iteration assumes: kinds without an exact
prox are rejected at construction.  All shipped kinds are convex; the
squared-l2 kind is mu-strongly convex.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError

__all__ = ["Regularizer", "zero", "ball", "box", "l1", "squared_l2"]

KINDS = ("zero", "indicator-euclidean-ball", "indicator-box", "l1", "squared-l2")

# Feasibility slack for indicator values: prox outputs sit on constraint
# boundaries up to roundoff and must evaluate as feasible.
_FEAS_REL = 1e-12


@dataclass(frozen=True)
class Regularizer:
    """A closed convex regularizer r with exact value and prox.

    Parameters
    ----------
    kind : str
        One of ``zero``, ``indicator-euclidean-ball``, ``indicator-box``,
        ``l1``, ``squared-l2``.
    radius : float
        Ball radius (ball kind).
    lower, upper : ndarray
        Per-coordinate bounds, ``-inf``/``+inf`` for unconstrained
        coordinates (box kind).
    weight : float
        l1 weight, or the mu of (mu/2)||x||^2 for squared-l2.
    """

    kind: str
    radius: float = 0.0
    lower: np.ndarray = None
    upper: np.ndarray = None
    weight: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown regularizer kind {self.kind!r}")
        if self.kind == "indicator-euclidean-ball" and not self.radius > 0:
            raise InvalidParameterError("ball radius must be positive")
        if self.kind == "indicator-box":
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            if lo.shape != hi.shape or lo.ndim != 1:
                raise InvalidParameterError("box bounds must be 1-d arrays of equal length")
            if np.any(lo > hi):
                raise InvalidParameterError("box lower bound exceeds upper bound")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        if self.kind in ("l1", "squared-l2") and self.weight < 0:
            raise InvalidParameterError("weight must be nonnegative")

    @property
    def mu(self):
        """Strong-convexity modulus (0 for all kinds except squared-l2)."""
        return self.weight if self.kind == "squared-l2" else 0.0

    def _check_dim(self, x):
        if self.kind == "indicator-box" and x.shape[0] != self.lower.shape[0]:
            raise DimensionMismatchError(
                f"box of dimension {self.lower.shape[0]} applied to vector of "
                f"dimension {x.shape[0]}")

    def value(self, x):
        """r(x); +inf for indicator violation."""
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        if self.kind == "zero":
            return 0.0
        if self.kind == "indicator-euclidean-ball":
            slack = _FEAS_REL * (1.0 + self.radius)
            return 0.0 if np.linalg.norm(x) <= self.radius + slack else np.inf
        if self.kind == "indicator-box":
            slack = _FEAS_REL * (1.0 + np.where(np.isfinite(self.upper), np.abs(self.upper), 0.0)
                                 + np.where(np.isfinite(self.lower), np.abs(self.lower), 0.0))
            ok = np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack)
            return 0.0 if ok else np.inf
        if self.kind == "l1":
            return self.weight * float(np.sum(np.abs(x)))
        return 0.5 * self.weight * float(x @ x)

    def prox(self, x, step):
        """prox_{step * r}(x), the exact minimizer of the prox subproblem."""
        if not step > 0:
            raise InvalidParameterError("prox step must be positive")
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        if self.kind == "zero":
            return x.copy()
        if self.kind == "indicator-euclidean-ball":
            norm = np.linalg.norm(x)
            if norm <= self.radius:
                return x.copy()
            return x * (self.radius / norm)
        if self.kind == "indicator-box":
            return np.clip(x, self.lower, self.upper)
        if self.kind == "l1":
            t = step * self.weight
            return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
        return x / (1.0 + step * self.weight)

    def to_config(self):
        """Serialize to the config file's ``regularizer`` object."""
        cfg = {"kind": self.kind}
        if self.kind == "indicator-euclidean-ball":
            cfg["radius"] = self.radius
        elif self.kind == "indicator-box":
            cfg["lower"] = list(self.lower)
            cfg["upper"] = list(self.upper)
        elif self.kind in ("l1", "squared-l2"):
            cfg["weight"] = self.weight
        return cfg

    @staticmethod
    def from_config(cfg):
        kind = cfg.get("kind", "zero")
        if kind == "indicator-euclidean-ball":
            return ball(cfg["radius"])
        if kind == "indicator-box":
            return box(cfg["lower"], cfg["upper"])
        if kind == "l1":
            return l1(cfg["weight"])
        if kind == "squared-l2":
            return squared_l2(cfg["weight"])
        if kind == "zero":
            return zero()
        raise InvalidParameterError(f"unknown regularizer kind {kind!r}")


def zero():
    return Regularizer("zero")


def ball(radius):
    return Regularizer("indicator-euclidean-ball", radius=float(radius))


def box(lower, upper):
    return Regularizer("indicator-box",
                       lower=np.asarray(lower, dtype=float),
                       upper=np.asarray(upper, dtype=float))


def l1(weight):
    return Regularizer("l1", weight=float(weight))


def squared_l2(weight):
    return Regularizer("squared-l2", weight=float(weight))
