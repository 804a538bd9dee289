"""Stochastic one-sided model families and the per-step subproblem.

Three families are supported, selected by :class:`ModelFamily`:

* ``linear``      f_x(y, xi) = f(x, xi) + <G(x, xi), y - x>
* ``prox-linear`` the sampled composition with its inner map linearized
* ``prox-point``  f_x(y, xi) = f(y, xi), the sampled function itself

``model_step`` solves  argmin_y { r(y) + f_x(y, xi) + (beta/2)||y - x||^2 }
exactly, dispatching to the problem-specific closed forms where they
exist and to the certified generic solver (documented tolerance
``GENERIC_STEP_TOL``) for the remaining supported combinations.  The
step requires beta > eta so the subproblem is strongly convex; beta <=
eta is rejected rather than clamped, since a silent clamp would mask a
misconfigured run.  The effective (tau, eta) depend on the family: both
vanish for models that are exact or exact-in-expectation under-estimators
(prox-point always; every family on the convex instances).
"""

import enum

import numpy as np

from . import problems as pb
from .errors import (InvalidParameterError, NonconvexSubproblemError,
                     UnsupportedCombinationError)
from .problems import TheoreticalConstants  # noqa: F401  (re-export)
from .subproblems import (AbsAffinePiece, AbsBilinearPiece, AbsSymOuterPiece,
                          HingeAffinePiece, SubproblemSpec, solve_certified)

__all__ = ["ModelFamily", "TheoreticalConstants", "family_tau", "family_eta",
           "model_value", "model_step", "model_lipschitz", "SampledModel",
           "model_step_pieces", "GENERIC_STEP_TOL"]

GENERIC_STEP_TOL = 1e-10

_CONVEX_KINDS = (pb.LAD, pb.CVAR)


class ModelFamily(enum.Enum):
    LINEAR = "sgd"
    PROX_LINEAR = "prox-linear"
    PROX_POINT = "prox-point"

    @staticmethod
    def from_config(name):
        for fam in ModelFamily:
            if fam.value == name:
                return fam
        raise InvalidParameterError(f"unknown method {name!r}")

    def to_config(self):
        return self.value


def family_tau(problem, family):
    """One-sided accuracy modulus for the family on this instance."""
    if family is ModelFamily.PROX_POINT or problem.kind in _CONVEX_KINDS:
        return 0.0
    return problem.constants.tau


def family_eta(problem, family):
    """Model weak-convexity modulus for the family on this instance.

    Linear and prox-linear models are convex (plus a convex regularizer),
    so eta = 0; the prox-point model is the sampled function itself, so
    its eta is the objective's weak-convexity modulus rho.
    """
    if family is ModelFamily.PROX_POINT:
        return problem.constants.rho
    return 0.0


def model_value(family, problem, base, i, y):
    """f_base(y, xi_i) for the chosen family."""
    base = problem.check_point(base)
    y = problem.check_point(y)
    if family is ModelFamily.PROX_POINT:
        return pb.datum_value(problem, i, y)
    if family is ModelFamily.LINEAR:
        g = pb.stochastic_subgradient(problem, base, i).vector
        return pb.datum_value(problem, i, base) + float(g @ (y - base))
    # prox-linear
    if problem.kind == pb.PHASE:
        a = problem.A[i]
        t = float(a @ base)
        return abs(t * t + 2.0 * t * float(a @ (y - base)) - problem.b[i])
    if problem.kind == pb.BLIND:
        u, v = problem.U[i], problem.V[i]
        d1 = problem.d1
        du, dv = float(u @ base[:d1]), float(v @ base[d1:])
        lin = du * dv + dv * float(u @ (y[:d1] - base[:d1])) \
            + du * float(v @ (y[d1:] - base[d1:]))
        return abs(lin - problem.b[i])
    if problem.kind == pb.LAD:
        return pb.datum_value(problem, i, y)
    if problem.kind == pb.CVAR:
        a = problem.A[i]
        x_t = base[:-1]
        t = float(a @ x_t) - problem.b[i]
        v = float(np.sign(t)) * a
        alpha = problem.alpha
        hinge = abs(t) + float(v @ (y[:-1] - x_t)) - y[-1]
        return (1.0 - alpha) * y[-1] + max(hinge, 0.0)
    raise InvalidParameterError(f"unknown problem kind {problem.kind!r}")


def model_step_pieces(family, problem, i, base):
    """(lin, const, pieces) describing f_base(., xi_i) for the dual solver."""
    dim = problem.dim
    if family is ModelFamily.LINEAR:
        g = pb.stochastic_subgradient(problem, base, i).vector
        const = pb.datum_value(problem, i, base) - float(g @ base)
        return g, const, []
    if family is ModelFamily.PROX_LINEAR:
        if problem.kind == pb.PHASE:
            a = problem.A[i]
            t = float(a @ base)
            return np.zeros(dim), 0.0, [AbsAffinePiece(2.0 * t * a,
                                                       -t * t - problem.b[i], 1.0)]
        if problem.kind == pb.BLIND:
            u, v = problem.U[i], problem.V[i]
            d1 = problem.d1
            du, dv = float(u @ base[:d1]), float(v @ base[d1:])
            g = np.concatenate([dv * u, du * v])
            return np.zeros(dim), 0.0, [AbsAffinePiece(g, -du * dv - problem.b[i], 1.0)]
        if problem.kind == pb.LAD:
            return np.zeros(dim), 0.0, [AbsAffinePiece(problem.A[i],
                                                       -problem.b[i], 1.0)]
        if problem.kind == pb.CVAR:
            a = problem.A[i]
            x_t = base[:-1]
            t = float(a @ x_t) - problem.b[i]
            v = float(np.sign(t)) * a
            gpiece = np.concatenate([v, [-1.0]])
            s = abs(t) - float(v @ x_t)
            lin = np.zeros(dim)
            lin[-1] = 1.0 - problem.alpha
            return lin, 0.0, [HingeAffinePiece(gpiece, s, 1.0)]
    if family is ModelFamily.PROX_POINT:
        if problem.kind == pb.PHASE:
            return np.zeros(dim), 0.0, [AbsSymOuterPiece(problem.A[i], 1.0,
                                                         -problem.b[i], 1.0)]
        if problem.kind == pb.BLIND:
            return np.zeros(dim), 0.0, [AbsBilinearPiece(problem.U[i], problem.V[i],
                                                         -problem.b[i], 1.0, problem.d1)]
        if problem.kind == pb.LAD:
            return np.zeros(dim), 0.0, [AbsAffinePiece(problem.A[i],
                                                       -problem.b[i], 1.0)]
    raise UnsupportedCombinationError(
        f"no model description for ({family.value}, {problem.kind})")


def _generic_step(family, problem, reg, base, i, beta, tol=GENERIC_STEP_TOL):
    lin, const, pieces = model_step_pieces(family, problem, i, base)
    reg_dim = problem.dim - 1 if problem.kind == pb.CVAR else None
    spec = SubproblemSpec(
        dim=problem.dim,
        h_iso=beta,
        lin=lin - beta * base,
        const=const + 0.5 * beta * float(base @ base),
        pieces=pieces,
        reg=reg,
        reg_dim=reg_dim,
    )
    return solve_certified(spec, tol).y


def model_step(family, problem, reg, base, i, beta):
    """Exact global minimizer of the model-step subproblem.

    Raises :class:`NonconvexSubproblemError` when beta <= eta for the
    family, and :class:`UnsupportedCombinationError` when no exact solver
    (closed form or certified generic) covers the combination.
    """
    base = problem.check_point(base)
    eta = family_eta(problem, family)
    if not beta > eta:
        raise NonconvexSubproblemError(
            f"beta = {beta} must exceed the model weak-convexity modulus {eta}")

    if family is ModelFamily.LINEAR:
        g = pb.stochastic_subgradient(problem, base, i).vector
        alpha = 1.0 / beta
        return reg.prox(base - alpha * g, alpha)

    zero_reg = reg.kind == "zero"
    if problem.kind == pb.PHASE and zero_reg:
        if family is ModelFamily.PROX_LINEAR:
            return pb.proxlinear_step_phase(problem, base, i, beta)
        return pb.proxpoint_step_phase(problem, base, i, beta)
    if problem.kind == pb.BLIND and zero_reg:
        if family is ModelFamily.PROX_LINEAR:
            return pb.proxlinear_step_blind(problem, base, i, beta)
        return pb.proxpoint_step_blind(problem, base, i, beta)
    if problem.kind == pb.LAD:
        step = pb.lad_model_step(problem, base, i, beta, reg)
        if step is not None:
            return step
    if problem.kind == pb.CVAR:
        if family is ModelFamily.PROX_POINT:
            raise UnsupportedCombinationError(
                "prox-point steps on the cVaR instance have no exact solver")
        y, g = pb.cvar_model_step(problem, base, i, beta, reg)
        return np.concatenate([y, [g]])
    return _generic_step(family, problem, reg, base, i, beta)


def model_lipschitz(family, problem, i, x, y):
    """A valid bound on the model's slope along the segment [x, y].

    For affine models the bound is exact and global; for the prox-point
    family it is the endpoint maximum of the per-datum slope, valid on
    the segment because the inner products are affine along it.
    """
    if family is ModelFamily.LINEAR:
        return float(np.linalg.norm(pb.stochastic_subgradient(problem, x, i).vector))
    if problem.kind == pb.PHASE:
        a = problem.A[i]
        an = float(np.linalg.norm(a))
        if family is ModelFamily.PROX_LINEAR:
            return 2.0 * abs(float(a @ x)) * an
        return 2.0 * max(abs(float(a @ x)), abs(float(a @ y))) * an
    if problem.kind == pb.BLIND:
        u, v = problem.U[i], problem.V[i]
        d1 = problem.d1

        def slope(z):
            du, dv = float(u @ z[:d1]), float(v @ z[d1:])
            return float(np.sqrt(dv * dv * (u @ u) + du * du * (v @ v)))

        if family is ModelFamily.PROX_LINEAR:
            return slope(x)
        du = max(abs(float(u @ x[:d1])), abs(float(u @ y[:d1])))
        dv = max(abs(float(v @ x[d1:])), abs(float(v @ y[d1:])))
        return float(np.sqrt(dv * dv * (u @ u) + du * du * (v @ v)))
    if problem.kind == pb.LAD:
        return float(np.linalg.norm(problem.A[i]))
    if problem.kind == pb.CVAR:
        a = problem.A[i]
        return float(np.sqrt(a @ a + 1.0)) + (1.0 - problem.alpha)
    raise InvalidParameterError(f"unknown problem kind {problem.kind!r}")


class SampledModel:
    """One sampled model f_base(., xi_i), evaluable and structured.

    The generic oracle solver consumes this object: it can evaluate the
    model pointwise and expose the piecewise description the certified
    dual solve needs.
    """

    def __init__(self, family, problem, index, base):
        self.family = family
        self.problem = problem
        self.index = int(index)
        self.base = problem.check_point(base)

    def value(self, y):
        return model_value(self.family, self.problem, self.base, self.index, y)

    def pieces(self):
        return model_step_pieces(self.family, self.problem, self.index, self.base)

    @property
    def eta(self):
        return family_eta(self.problem, self.family)

    @property
    def reg_dim(self):
        return self.problem.dim - 1 if self.problem.kind == pb.CVAR else None
