"""Moreau-envelope stationarity measurement.

The convergence measure of the weakly convex theory is the norm of the
envelope gradient

    phi_lam(x) = min_y { phi(y) + (1/2 lam) ||y - x||^2 },
    grad phi_lam(x) = (x - prox_{lam phi}(x)) / lam,      lam < 1/rho,

so measuring it means solving the strongly convex inner problem to a
certified tolerance.  :func:`moreau_envelope` does that with the dual
certificate of :mod:`modelprox.subproblems` and reports the envelope
value, the proximal point, the gradient norm (exact in terms of the
computed proximal point) and the certified inner suboptimality.

For smooth-plus-convex comparisons the classical prox-gradient mapping

    G_lam(x) = (x - prox_{lam r}(x - lam grad f(x))) / lam

is provided; the two measures are proportional on that problem class.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import problems as pb
from .errors import InvalidParameterError, UnsupportedCombinationError
from .subproblems import SubproblemSpec, solve_certified

__all__ = ["EnvelopeReport", "QuadraticObjective", "moreau_envelope",
           "prox_gradient_mapping"]


@dataclass(frozen=True)
class EnvelopeReport:
    """Moreau-envelope measurements at one query point.

    ``grad_norm`` equals ``||x - prox_point|| / lam`` exactly by
    construction; ``inner_suboptimality`` is the certified bound on the
    inner solve (primal-dual gap).
    """

    lam: float
    envelope_value: float
    prox_point: np.ndarray
    grad_norm: float
    inner_suboptimality: float


class QuadraticObjective:
    """A smooth quadratic 0.5 x'Qx + g.x + c as an envelope subject.

    Used for the smooth-instance comparisons between the envelope
    gradient and the prox-gradient mapping; Q must be symmetric PSD.
    """

    def __init__(self, Q, g, c=0.0):
        self.Q = np.asarray(Q, dtype=float)
        self.g = np.asarray(g, dtype=float)
        self.c = float(c)
        self.dim = self.g.shape[0]
        eigs = eigh(self.Q, eigvals_only=True)
        if eigs[0] < -1e-12:
            raise InvalidParameterError("Q must be positive semidefinite")
        self.grad_lipschitz = float(max(eigs[-1], 0.0))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ (self.Q @ x)) + float(self.g @ x) + self.c

    def gradient(self, x):
        return self.Q @ np.asarray(x, dtype=float) + self.g

    @property
    def weak_convexity(self):
        return 0.0


def _description(objective):
    """(dim, rho, quad, lin, const, pieces) for an envelope subject."""
    if isinstance(objective, pb.ProblemInstance):
        lin, const, pieces = pb.objective_pieces(objective)
        return (objective.dim, objective.constants.rho, None, lin, const, pieces)
    if isinstance(objective, QuadraticObjective):
        return (objective.dim, objective.weak_convexity, objective.Q,
                objective.g, objective.c, [])
    raise UnsupportedCombinationError(
        f"no envelope description for {type(objective).__name__}")


def moreau_envelope(objective, reg, x, lam, tol):
    """Evaluate phi_lam, prox_{lam phi} and ||grad phi_lam|| at x.

    ``objective`` is a :class:`~modelprox.problems.ProblemInstance`
    (phase retrieval, blind deconvolution or LAD) or a
    :class:`QuadraticObjective`; phi = objective + reg.  Requires
    lam in (0, 1/rho) (any positive lam when rho = 0) and tol > 0; the
    inner problem is (1/lam - rho)-strongly convex and solved to a
    certified suboptimality <= tol.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be positive")
    dim, rho, quad, lin, const, pieces = _description(objective)
    if not lam > 0 or (rho > 0 and not lam < 1.0 / rho):
        raise InvalidParameterError(
            f"envelope parameter lam = {lam} must lie in (0, 1/rho) with rho = {rho}")
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise InvalidParameterError(
            f"query point of shape {x.shape} for dimension {dim}")
    spec = SubproblemSpec(
        dim=dim,
        h_iso=1.0 / lam,
        lin=lin - x / lam,
        const=const + 0.5 * float(x @ x) / lam,
        quad=quad,
        pieces=pieces,
        reg=reg,
    )
    res = solve_certified(spec, tol)
    grad_norm = float(np.linalg.norm(x - res.y)) / lam
    return EnvelopeReport(lam=lam, envelope_value=res.value, prox_point=res.y,
                          grad_norm=grad_norm, inner_suboptimality=res.gap)


def prox_gradient_mapping(f_smooth, reg, x, lam):
    """G_lam(x) = (x - prox_{lam r}(x - lam grad f(x))) / lam."""
    if not lam > 0:
        raise InvalidParameterError("lam must be positive")
    x = np.asarray(x, dtype=float)
    step = reg.prox(x - lam * f_smooth.gradient(x), lam)
    return (x - step) / lam
