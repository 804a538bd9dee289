"""Concrete weakly convex problem instances and their closed-form steps.

Four finite-sum instances are shipped, all realizable (objective zero at
the planted signal) so suboptimality gaps are exact:

* phase retrieval      f(x) = (1/m) sum_i |<a_i,x>^2 - b_i|
* blind deconvolution  f(x,y) = (1/m) sum_i |<u_i,x><v_i,y> - b_i|
* LAD                  f(x) = (1/m) sum_i |<a_i,x> - b_i|   (convex test bed)
* cVaR of LAD losses   f(x,g) = (1-alpha) g + (1/m) sum_i (|<a_i,x>-b_i| - g)^+

The per-step subproblems of the prox-linear and proximal point methods on
phase retrieval and blind deconvolution admit closed forms: a clipped
scaling of the model gradient for prox-linear, and a finite candidate
enumeration (at most four stationary points for phase; two sign cases plus
the real roots of a quartic for blind deconvolution) for the proximal
point method.  Those closed forms are implemented here and validated
against independent oracles by the verification suite.

Candidate enumeration order is part of the contract (it breaks exact
value ties deterministically) and is documented on each step function.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (DimensionMismatchError, InvalidParameterError,
                     UnsupportedCombinationError)
from .quartic import quartic_real_roots
from .rng import gaussian_vector, unit_sphere_point
from .subproblems import AbsAffinePiece, AbsBilinearPiece, AbsSymOuterPiece

__all__ = [
    "TheoreticalConstants", "ProblemInstance", "SubgradientSample",
    "generate_phase_retrieval", "generate_blind_deconvolution",
    "generate_lad", "generate_cvar",
    "phase_instance", "blind_instance", "lad_instance", "cvar_instance",
    "objective_value", "datum_value", "stochastic_subgradient",
    "solve_linear_model_prox", "proxlinear_step_phase", "proxlinear_step_blind",
    "proxpoint_step_phase", "proxpoint_step_blind",
    "abs_affine_prox_step", "lad_model_step", "cvar_model_step",
    "objective_pieces", "problem_to_config", "problem_from_config",
]

PHASE = "phase-retrieval"
BLIND = "blind-deconvolution"
LAD = "lad"
CVAR = "cvar"


@dataclass(frozen=True)
class TheoreticalConstants:
    """Moduli entering the convergence theory.

    rho is the weak-convexity modulus of the objective, rho_bar the
    envelope parameter (must exceed tau + eta), tau the one-sided model
    accuracy modulus, eta the model weak-convexity modulus, lipschitz_L
    the second-moment bound on model slopes (for the non-Lipschitz
    phase/blind objectives this is the exact bound over the ball of
    radius 2, which covers sphere-initialized realizable runs), mu the
    strong-convexity modulus of an accompanying regularizer, sigma the
    variance bound of the smooth-case analysis, and delta_gap an upper
    bound on the initial envelope gap.

    The stored (tau, eta) are the subgradient-family instantiation
    (tau = rho, eta = 0, all shipped regularizers being convex); the
    prox-point family swaps the pair to (0, rho), which the family
    lookups in :mod:`modelprox.models` perform.  Either way
    tau + eta = rho < rho_bar.
    """

    rho: float
    rho_bar: float
    tau: float
    eta: float
    lipschitz_L: float
    mu: float = 0.0
    sigma: float = 0.0
    delta_gap: float = 0.0

    def __post_init__(self):
        if min(self.rho, self.tau, self.eta, self.lipschitz_L, self.mu,
               self.sigma, self.delta_gap) < 0:
            raise InvalidParameterError("constants must be nonnegative")
        if not self.rho_bar > self.tau + self.eta:
            raise InvalidParameterError("rho_bar must exceed tau + eta")


@dataclass(frozen=True)
class SubgradientSample:
    """One stochastic subgradient draw G(x, xi).

    ``per_datum_lipschitz`` bounds ``||vector||`` at the query point and
    doubles as the per-datum model slope L(xi) in property checks.
    """

    vector: np.ndarray
    datum: int
    per_datum_lipschitz: float


@dataclass(frozen=True)
class ProblemInstance:
    """A finite-sum weakly convex objective with generated data.

    The variable is a flat vector: for blind deconvolution the pair
    (x, y) concatenated, for cVaR the pair (x, gamma) with the scalar
    last.  ``ground_truth`` attains objective zero on realizable
    instances.
    """

    kind: str
    m: int
    dim: int
    constants: TheoreticalConstants
    A: np.ndarray = None            # (m, d) for phase / lad / cvar
    b: np.ndarray = None            # (m,)
    U: np.ndarray = None            # (m, d1) blind
    V: np.ndarray = None            # (m, d2) blind
    d1: int = 0
    d2: int = 0
    alpha: float = 0.0              # cVaR tail level
    ground_truth: np.ndarray = None
    seed_info: dict = field(default_factory=dict)

    @property
    def variable_dim(self):
        return self.dim

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(
                f"point of shape {x.shape} for problem of dimension {self.dim}")
        if not np.all(np.isfinite(x)):
            raise InvalidParameterError("point has non-finite entries")
        return x


def _finite(arr, name):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    return arr


# ---------------------------------------------------------------------------
# instance constructors


def phase_instance(A, b, ground_truth=None, seed_info=None):
    A = np.atleast_2d(_finite(A, "A"))
    b = np.atleast_1d(_finite(b, "b"))
    if np.any(b < 0):
        raise InvalidParameterError("phase retrieval requires b >= 0")
    m, d = A.shape
    row2 = np.sum(A * A, axis=1)
    rho = 2.0 * float(np.max(row2)) if m else 0.0
    lip = float(np.sqrt(np.mean((4.0 * row2) ** 2))) if m else 0.0
    consts = TheoreticalConstants(rho=rho, rho_bar=2 * rho if rho > 0 else 1.0,
                                  tau=rho, eta=0.0, lipschitz_L=lip)
    return ProblemInstance(PHASE, m, d, consts, A=A, b=b,
                           ground_truth=ground_truth,
                           seed_info=seed_info or {})


def blind_instance(U, V, b, ground_truth=None, seed_info=None):
    U = np.atleast_2d(_finite(U, "U"))
    V = np.atleast_2d(_finite(V, "V"))
    b = np.atleast_1d(_finite(b, "b"))
    m, d1 = U.shape
    d2 = V.shape[1]
    un = np.linalg.norm(U, axis=1)
    vn = np.linalg.norm(V, axis=1)
    rho = float(np.max(un * vn)) if m else 0.0
    lip = float(np.sqrt(np.mean(8.0 * (un * vn) ** 2))) if m else 0.0
    consts = TheoreticalConstants(rho=rho, rho_bar=2 * rho if rho > 0 else 1.0,
                                  tau=rho, eta=0.0, lipschitz_L=lip)
    return ProblemInstance(BLIND, m, d1 + d2, consts, U=U, V=V, b=b,
                           d1=d1, d2=d2, ground_truth=ground_truth,
                           seed_info=seed_info or {})


def lad_instance(A, b, mu=0.0, ground_truth=None, seed_info=None):
    A = np.atleast_2d(_finite(A, "A"))
    b = np.atleast_1d(_finite(b, "b"))
    m, d = A.shape
    lip = float(np.sqrt(np.mean(np.sum(A * A, axis=1)))) if m else 0.0
    consts = TheoreticalConstants(rho=0.0, rho_bar=1.0, tau=0.0, eta=0.0,
                                  lipschitz_L=lip, mu=float(mu))
    return ProblemInstance(LAD, m, d, consts, A=A, b=b,
                           ground_truth=ground_truth,
                           seed_info=seed_info or {})


def cvar_instance(A, b, alpha, mu=0.0, ground_truth=None, seed_info=None):
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("cVaR tail level must lie in (0, 1)")
    A = np.atleast_2d(_finite(A, "A"))
    b = np.atleast_1d(_finite(b, "b"))
    m, d = A.shape
    tail = max(alpha, 1.0 - alpha)
    lip = float(np.sqrt(np.mean(np.sum(A * A, axis=1) + tail ** 2))) if m else 0.0
    consts = TheoreticalConstants(rho=0.0, rho_bar=1.0, tau=0.0, eta=0.0,
                                  lipschitz_L=lip, mu=float(mu))
    return ProblemInstance(CVAR, m, d + 1, consts, A=A, b=b, alpha=float(alpha),
                           ground_truth=ground_truth,
                           seed_info=seed_info or {})


def generate_phase_retrieval(rng, d, m):
    """Planted phase retrieval: Gaussian a_i, unit-sphere signal,
    b_i = <a_i, xbar>^2.  Draw order: measurement block, then signal."""
    if d < 1 or m < 1:
        raise InvalidParameterError("d and m must be positive")
    A = rng.standard_normal(m * d).reshape(m, d)
    xbar = unit_sphere_point(rng, d)
    b = (A @ xbar) ** 2
    return phase_instance(A, b, ground_truth=xbar,
                          seed_info={"seed": rng.seed, "stream_id": rng.stream_id})


def generate_blind_deconvolution(rng, d1, d2, m):
    """Planted blind deconvolution: Gaussian u_i, v_i and a single
    unit-sphere signal shared by both factors (independent signals when
    d1 != d2, where sharing is undefined); b_i = <u_i,xbar><v_i,xbar>."""
    if d1 < 1 or d2 < 1 or m < 1:
        raise InvalidParameterError("d1, d2 and m must be positive")
    U = rng.standard_normal(m * d1).reshape(m, d1)
    V = rng.standard_normal(m * d2).reshape(m, d2)
    xbar = unit_sphere_point(rng, d1)
    ybar = xbar if d1 == d2 else unit_sphere_point(rng, d2)
    b = (U @ xbar) * (V @ ybar)
    return blind_instance(U, V, b, ground_truth=np.concatenate([xbar, ybar]),
                          seed_info={"seed": rng.seed, "stream_id": rng.stream_id})


def generate_lad(rng, d, m, mu=0.0):
    """Planted least absolute deviations, the convex test bed."""
    if d < 1 or m < 1:
        raise InvalidParameterError("d and m must be positive")
    if mu < 0:
        raise InvalidParameterError("mu must be nonnegative")
    A = rng.standard_normal(m * d).reshape(m, d)
    xbar = unit_sphere_point(rng, d)
    b = A @ xbar
    return lad_instance(A, b, mu=mu, ground_truth=xbar,
                        seed_info={"seed": rng.seed, "stream_id": rng.stream_id})


def generate_cvar(rng, d, m, alpha, mu=0.0):
    """Planted cVaR over LAD losses; (xbar, 0) attains objective zero."""
    if d < 1 or m < 1:
        raise InvalidParameterError("d and m must be positive")
    A = rng.standard_normal(m * d).reshape(m, d)
    xbar = unit_sphere_point(rng, d)
    b = A @ xbar
    gt = np.concatenate([xbar, [0.0]])
    return cvar_instance(A, b, alpha, mu=mu, ground_truth=gt,
                         seed_info={"seed": rng.seed, "stream_id": rng.stream_id})


# ---------------------------------------------------------------------------
# evaluation


def objective_value(problem, x):
    """Exact finite-sum value f(x); the regularizer is the caller's."""
    x = problem.check_point(x)
    if problem.kind == PHASE:
        return float(np.mean(np.abs((problem.A @ x) ** 2 - problem.b)))
    if problem.kind == BLIND:
        xx, yy = x[:problem.d1], x[problem.d1:]
        return float(np.mean(np.abs((problem.U @ xx) * (problem.V @ yy) - problem.b)))
    if problem.kind == LAD:
        return float(np.mean(np.abs(problem.A @ x - problem.b)))
    if problem.kind == CVAR:
        y, g = x[:-1], x[-1]
        losses = np.abs(problem.A @ y - problem.b)
        return float((1.0 - problem.alpha) * g + np.mean(np.maximum(losses - g, 0.0)))
    raise InvalidParameterError(f"unknown problem kind {problem.kind!r}")


def datum_value(problem, i, x):
    """f(x, xi_i), the single-datum loss."""
    x = np.asarray(x, dtype=float)
    if problem.kind == PHASE:
        return float(abs(float(problem.A[i] @ x) ** 2 - problem.b[i]))
    if problem.kind == BLIND:
        du = float(problem.U[i] @ x[:problem.d1])
        dv = float(problem.V[i] @ x[problem.d1:])
        return abs(du * dv - problem.b[i])
    if problem.kind == LAD:
        return float(abs(problem.A[i] @ x - problem.b[i]))
    if problem.kind == CVAR:
        y, g = x[:-1], x[-1]
        loss = abs(float(problem.A[i] @ y) - problem.b[i])
        return (1.0 - problem.alpha) * g + max(loss - g, 0.0)
    raise InvalidParameterError(f"unknown problem kind {problem.kind!r}")


def _sign0(t):
    # Tie convention everywhere: the zero selection at kinks.
    return float(np.sign(t))


def stochastic_subgradient(problem, x, i):
    """A measurable subgradient selection for datum i.

    At the nonsmooth tie (zero residual) the sign term is taken as 0,
    which is a valid selection since 0 lies in [-1, 1].
    """
    x = problem.check_point(x)
    if problem.kind == PHASE:
        a = problem.A[i]
        t = float(a @ x)
        s = _sign0(t * t - problem.b[i])
        vec = (2.0 * t * s) * a
        lip = 2.0 * abs(t) * float(np.linalg.norm(a))
        return SubgradientSample(vec, i, lip)
    if problem.kind == BLIND:
        u, v = problem.U[i], problem.V[i]
        du = float(u @ x[:problem.d1])
        dv = float(v @ x[problem.d1:])
        s = _sign0(du * dv - problem.b[i])
        vec = np.concatenate([(s * dv) * u, (s * du) * v])
        lip = float(np.sqrt(dv * dv * (u @ u) + du * du * (v @ v)))
        return SubgradientSample(vec, i, lip)
    if problem.kind == LAD:
        a = problem.A[i]
        s = _sign0(float(a @ x) - problem.b[i])
        return SubgradientSample(s * a, i, float(np.linalg.norm(a)))
    if problem.kind == CVAR:
        a = problem.A[i]
        y, g = x[:-1], x[-1]
        t = float(a @ y) - problem.b[i]
        alpha = problem.alpha
        if abs(t) - g > 0:
            vec = np.concatenate([_sign0(t) * a, [-alpha]])
        else:
            vec = np.concatenate([np.zeros_like(a), [1.0 - alpha]])
        lip = float(np.sqrt(a @ a + max(alpha, 1.0 - alpha) ** 2))
        return SubgradientSample(vec, i, lip)
    raise InvalidParameterError(f"unknown problem kind {problem.kind!r}")


# ---------------------------------------------------------------------------
# closed-form model steps


def solve_linear_model_prox(gamma, zeta):
    """argmin_D |gamma + <zeta, D>| + 0.5 ||D||^2  via the clip formula

        D* = proj_[-1,1](-gamma / ||zeta||^2) * zeta,

    with D* = 0 when zeta = 0 (the objective then reduces to
    |gamma| + 0.5||D||^2).
    """
    zeta = np.asarray(zeta, dtype=float)
    zn2 = float(zeta @ zeta)
    if zn2 == 0.0:
        return np.zeros_like(zeta)
    t = min(1.0, max(-1.0, -gamma / zn2))
    return t * zeta


def proxlinear_step_phase(problem, x, i, beta):
    """Prox-linear step on phase retrieval.

    With lam = 1/beta, gamma = lam (<a,x>^2 - b) and zeta = 2 lam <a,x> a,
    the step is x + D* from the clip formula.
    """
    if not beta > 0:
        raise InvalidParameterError("beta must be positive")
    x = problem.check_point(x)
    lam = 1.0 / beta
    a = problem.A[i]
    t = float(a @ x)
    gamma = lam * (t * t - problem.b[i])
    zeta = (2.0 * lam * t) * a
    return x + solve_linear_model_prox(gamma, zeta)


def proxlinear_step_blind(problem, xy, i, beta):
    """Prox-linear step on blind deconvolution (joint update of (x, y)).

    zeta = lam (<v,y> u, <u,x> v), gamma = lam (<u,x><v,y> - b).
    """
    if not beta > 0:
        raise InvalidParameterError("beta must be positive")
    xy = problem.check_point(xy)
    lam = 1.0 / beta
    u, v = problem.U[i], problem.V[i]
    du = float(u @ xy[:problem.d1])
    dv = float(v @ xy[problem.d1:])
    gamma = lam * (du * dv - problem.b[i])
    zeta = lam * np.concatenate([dv * u, du * v])
    return xy + solve_linear_model_prox(gamma, zeta)


def _phase_subproblem_value(a, b, lam, x, y):
    t = float(a @ y)
    diff = y - x
    return abs(t * t - b) + float(diff @ diff) / (2.0 * lam)


def proxpoint_step_phase(problem, x, i, beta):
    """Proximal point step on phase retrieval by candidate enumeration.

    The stationary points of |<a,y>^2 - b| + (1/2 lam)||y - x||^2 lie on
    the line x + span(a); there are at most four.  Enumeration order
    (first strict minimum wins, so exact ties break toward the earlier
    candidate):

      1. smooth '+': y = x - (2 lam <a,x> / (2 lam ||a||^2 + 1)) a
      2. smooth '-': y = x - (2 lam <a,x> / (2 lam ||a||^2 - 1)) a
         (skipped when 2 lam ||a||^2 = 1)
      3. boundary '+': the root <a,y> = +sqrt(b)
      4. boundary '-': the root <a,y> = -sqrt(b)
      5. the base point x

    The boundary labels refer to the sign of the attained root of
    <a,y>^2 = b, i.e. y = x - ((<a,x> -+ sqrt(b)) / ||a||^2) a.
    """
    if not beta > 0:
        raise InvalidParameterError("beta must be positive")
    x = problem.check_point(x)
    lam = 1.0 / beta
    a = problem.A[i]
    b = float(problem.b[i])
    an2 = float(a @ a)
    if an2 == 0.0:
        return x.copy()
    t = float(a @ x)
    cands = []
    den = 2.0 * lam * an2 + 1.0
    cands.append(x - (2.0 * lam * t / den) * a)
    den = 2.0 * lam * an2 - 1.0
    if den != 0.0:
        cands.append(x - (2.0 * lam * t / den) * a)
    sqb = float(np.sqrt(b))
    cands.append(x - ((t - sqb) / an2) * a)
    cands.append(x - ((t + sqb) / an2) * a)
    cands.append(x)
    best, best_val = None, np.inf
    for y in cands:
        val = _phase_subproblem_value(a, b, lam, x, y)
        if val < best_val:
            best, best_val = y, val
    return best.copy()


def proxpoint_step_blind(problem, xy, i, beta):
    """Proximal point step on blind deconvolution by candidate enumeration.

    Candidates for |<u,x><v,y> - b| + (1/2 lam)(||x-x0||^2 + ||y-y0||^2),
    in order (first strict minimum wins):

      1. smooth '+', 2. smooth '-':
           x = x0 - lam ((+-<v,y0> - lam ||v||^2 <u,x0>) / (1 - lam^2 ||u||^2 ||v||^2)) u
           y = y0 - lam ((+-<u,x0> - lam ||u||^2 <v,y0>) / (1 - lam^2 ||u||^2 ||v||^2)) v
         (both skipped when lam^2 ||u||^2 ||v||^2 = 1)
      3. boundary candidates from each real root eta (ascending) of
           ||v||^2 eta^4 - ||v||^2 <u,x0> eta^3 + b ||u||^2 <v,y0> eta - b^2 ||u||^2 = 0
         via g = (eta <u,x0> - eta^2) / (b ||u||^2),
             x = x0 - g (b/eta) u,  y = y0 - g eta v
         (skipped entirely when b = 0, and per root when eta is
         numerically zero)
      4. the base point (x0, y0)
    """
    if not beta > 0:
        raise InvalidParameterError("beta must be positive")
    xy = problem.check_point(xy)
    lam = 1.0 / beta
    u, v = problem.U[i], problem.V[i]
    b = float(problem.b[i])
    d1 = problem.d1
    x0, y0 = xy[:d1], xy[d1:]
    un2, vn2 = float(u @ u), float(v @ v)
    if un2 == 0.0 or vn2 == 0.0:
        return xy.copy()
    du0 = float(u @ x0)
    dv0 = float(v @ y0)

    def subvalue(xc, yc):
        dx, dy = xc - x0, yc - y0
        prod = float(u @ xc) * float(v @ yc)
        return abs(prod - b) + (float(dx @ dx) + float(dy @ dy)) / (2.0 * lam)

    cands = []
    denom = 1.0 - lam * lam * un2 * vn2
    if denom != 0.0:
        for sign in (1.0, -1.0):
            xc = x0 - lam * ((sign * dv0 - lam * vn2 * du0) / denom) * u
            yc = y0 - lam * ((sign * du0 - lam * un2 * dv0) / denom) * v
            cands.append((xc, yc))
    if b != 0.0:
        coeffs = np.array([vn2, -vn2 * du0, 0.0, b * un2 * dv0, -b * b * un2])
        roots = quartic_real_roots(coeffs)
        tiny = 1e-12 * max(1.0, abs(du0))
        for eta in roots:
            if abs(eta) <= tiny:
                continue
            g = (eta * du0 - eta * eta) / (b * un2)
            xc = x0 - (g * b / eta) * u
            yc = y0 - (g * eta) * v
            cands.append((xc, yc))
    cands.append((x0, y0))

    best, best_val = None, np.inf
    for xc, yc in cands:
        val = subvalue(xc, yc)
        if val < best_val:
            best, best_val = (xc, yc), val
    return np.concatenate([best[0], best[1]])


def abs_affine_prox_step(a, b, z, q):
    """argmin_y |<a,y> - b| + (q/2)||y - z||^2, exactly.

    The minimizer is y = z - (s/q) a with s the clipped residual scale
    s = proj_[-1,1](q (<a,z> - b) / ||a||^2); the unclipped case lands on
    the kink <a,y> = b.
    """
    a = np.asarray(a, dtype=float)
    an2 = float(a @ a)
    if an2 == 0.0:
        return np.asarray(z, dtype=float).copy()
    s = q * (float(a @ z) - b) / an2
    s = min(1.0, max(-1.0, s))
    return z - (s / q) * a


def lad_model_step(problem, x, i, beta, reg=None):
    """Exact LAD model step (prox-linear and prox-point coincide: the
    inner map is affine).  Supports the zero and squared-l2 regularizers
    in closed form; returns None for other kinds so the caller can fall
    back to the generic solver."""
    x = problem.check_point(x)
    a, b = problem.A[i], float(problem.b[i])
    if reg is None or reg.kind == "zero":
        return abs_affine_prox_step(a, b, x, beta)
    if reg.kind == "squared-l2":
        q = beta + reg.weight
        return abs_affine_prox_step(a, b, (beta / q) * x, q)
    return None


def cvar_model_step(problem, xg, i, beta, reg):
    """Exact minimizer of the cVaR linearized-loss model step.

    Minimizes over (y, g):

        (1-alpha) g + [l + <v, y - x_t> - g]^+ + r(y)
            + (beta/2)(||y - x_t||^2 + (g - g_t)^2)

    with l the sampled loss and v its subgradient.  The optimality system
    is parametrized by the hinge multiplier s in [0, 1]:

        y(s) = prox_{r/beta}(x_t - (s/beta) v),
        g(s) = g_t + (s - (1-alpha))/beta,

    and psi(s) = l + <v, y(s) - x_t> - g(s) is strictly decreasing, so the
    consistent case is unique: s = 0 if psi(0) <= 0 (hinge inactive),
    s = 1 if psi(1) >= 0 (hinge active), otherwise the kink root psi(s)=0
    located by bisection to machine precision.

    Returns the pair (y, g).
    """
    if not beta > 0:
        raise InvalidParameterError("beta must be positive")
    xg = problem.check_point(xg)
    x_t, g_t = xg[:-1], float(xg[-1])
    alpha = problem.alpha
    a = problem.A[i]
    t = float(a @ x_t) - problem.b[i]
    loss = abs(t)
    v = _sign0(t) * a

    def y_of(s):
        return reg.prox(x_t - (s / beta) * v, 1.0 / beta)

    def g_of(s):
        return g_t + (s - (1.0 - alpha)) / beta

    def psi(s):
        return loss + float(v @ (y_of(s) - x_t)) - g_of(s)

    if psi(0.0) <= 0.0:
        s = 0.0
    elif psi(1.0) >= 0.0:
        s = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if psi(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        s = 0.5 * (lo + hi)
    return y_of(s), g_of(s)


# ---------------------------------------------------------------------------
# structured descriptions for the certified solver


def objective_pieces(problem):
    """The full objective as (lin, const, pieces) for the dual solver.

    cVaR is not representable with interval duals (its hinge wraps an
    absolute value) and is rejected; its convex-case guarantees are
    measured in function values, not envelope norms.
    """
    m = problem.m
    w = 1.0 / m
    if problem.kind == PHASE:
        pieces = [AbsSymOuterPiece(problem.A[i], 1.0, -problem.b[i], w)
                  for i in range(m)]
        return np.zeros(problem.dim), 0.0, pieces
    if problem.kind == BLIND:
        pieces = [AbsBilinearPiece(problem.U[i], problem.V[i], -problem.b[i],
                                   w, problem.d1) for i in range(m)]
        return np.zeros(problem.dim), 0.0, pieces
    if problem.kind == LAD:
        pieces = [AbsAffinePiece(problem.A[i], -problem.b[i], w)
                  for i in range(m)]
        return np.zeros(problem.dim), 0.0, pieces
    raise UnsupportedCombinationError(
        f"no certified piecewise description for problem kind {problem.kind!r}")


# ---------------------------------------------------------------------------
# serialization


def problem_to_config(problem):
    """Plain-dict container (kind tag, dims, flattened arrays, seed)."""
    cfg = {"kind": problem.kind, "m": problem.m, "seed_info": dict(problem.seed_info)}
    if problem.ground_truth is not None:
        cfg["ground_truth"] = list(problem.ground_truth)
    if problem.kind == BLIND:
        cfg["d1"] = problem.d1
        cfg["d2"] = problem.d2
        cfg["U"] = list(problem.U.ravel())
        cfg["V"] = list(problem.V.ravel())
        cfg["b"] = list(problem.b)
    else:
        cfg["d"] = problem.A.shape[1]
        cfg["A"] = list(problem.A.ravel())
        cfg["b"] = list(problem.b)
        if problem.kind == CVAR:
            cfg["alpha"] = problem.alpha
        if problem.kind in (LAD, CVAR):
            cfg["mu"] = problem.constants.mu
    return cfg


def problem_from_config(cfg):
    kind = cfg["kind"]
    m = cfg["m"]
    gt = np.asarray(cfg["ground_truth"]) if "ground_truth" in cfg else None
    info = cfg.get("seed_info", {})
    if kind == BLIND:
        U = np.asarray(cfg["U"]).reshape(m, cfg["d1"])
        V = np.asarray(cfg["V"]).reshape(m, cfg["d2"])
        return blind_instance(U, V, np.asarray(cfg["b"]), ground_truth=gt,
                              seed_info=info)
    A = np.asarray(cfg["A"]).reshape(m, cfg["d"])
    b = np.asarray(cfg["b"])
    if kind == PHASE:
        return phase_instance(A, b, ground_truth=gt, seed_info=info)
    if kind == LAD:
        return lad_instance(A, b, mu=cfg.get("mu", 0.0), ground_truth=gt,
                            seed_info=info)
    if kind == CVAR:
        return cvar_instance(A, b, cfg["alpha"], mu=cfg.get("mu", 0.0),
                             ground_truth=gt, seed_info=info)
    raise InvalidParameterError(f"unknown problem kind {kind!r}")
