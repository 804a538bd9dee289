"""Certified solver for strongly convex piecewise subproblems.

Every inner problem this package has to solve exactly -- Moreau-envelope
evaluations, model-step subproblems used as oracles, the convex-case
minimizer of a regularized finite sum -- has the shape

    min_y  (h/2)||y||^2 + 0.5 y'Q0 y + g0.y + c0 + sum_i w_i p_i(c_i(y)) + r(y)

where each piece p_i is |.| or max(0, .) applied to an affine, a rank-one
quadratic, or a bilinear form c_i, and r is a regularizer with exact prox.
Plain subgradient descent cannot *certify* suboptimality here: at a kinked
minimizer no single subgradient selection is small.  Instead each piece is
dualized with a bounded scalar multiplier,

    |c(y)| = max_{u in [-1,1]} u c(y),      (c(y))^+ = max_{u in [0,1]} u c(y),

giving the Lagrangian L(y, u), concave (affine) in u and -- under the
strong-convexity preconditions the callers guarantee -- convex in y for
every u in the box.  Weak duality makes q(u) = min_y L(y, u) + r(y) a
rigorous lower bound on the minimum for every dual point, and Sion's
minimax theorem makes the bound tight, so the primal-dual gap is an exact
suboptimality certificate even at kinks.  q is smooth and concave (the
inner minimizer is unique), and is maximized over the box with L-BFGS-B
plus a projected-gradient polish.

All solves are deterministic.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh
from scipy.optimize import minimize

from .errors import (InvalidParameterError, NonconvexSubproblemError,
                     ToleranceNotMetError, UnsupportedCombinationError)

__all__ = [
    "AbsAffinePiece", "AbsSymOuterPiece", "AbsBilinearPiece", "HingeAffinePiece",
    "SubproblemSpec", "SolveResult", "solve_certified",
]


class AbsAffinePiece:
    """w * | g.y + s |"""

    is_quadratic = False
    lo, hi = -1.0, 1.0

    def __init__(self, g, s, w):
        self.g = np.asarray(g, dtype=float)
        self.s = float(s)
        self.w = float(w)

    def c_value(self, y):
        return float(self.g @ y) + self.s

    def lin(self):
        return self.g

    def hess_norm(self):
        return 0.0

    def primal(self, cval):
        return self.w * abs(cval)

    def init_dual(self, cval):
        return float(np.sign(cval))


class HingeAffinePiece:
    """w * max(0, g.y + s)"""

    is_quadratic = False
    lo, hi = 0.0, 1.0

    def __init__(self, g, s, w):
        self.g = np.asarray(g, dtype=float)
        self.s = float(s)
        self.w = float(w)

    def c_value(self, y):
        return float(self.g @ y) + self.s

    def lin(self):
        return self.g

    def hess_norm(self):
        return 0.0

    def primal(self, cval):
        return self.w * max(0.0, cval)

    def init_dual(self, cval):
        return 1.0 if cval > 0 else 0.0


class AbsSymOuterPiece:
    """w * | coef*(a.y)^2 + s |   (Hessian 2*coef*a a')"""

    is_quadratic = True
    lo, hi = -1.0, 1.0

    def __init__(self, a, coef, s, w):
        self.a = np.asarray(a, dtype=float)
        self.coef = float(coef)
        self.s = float(s)
        self.w = float(w)

    def c_value(self, y):
        t = float(self.a @ y)
        return self.coef * t * t + self.s

    def hess_add(self, H, scale):
        H += (2.0 * self.coef * scale) * np.outer(self.a, self.a)

    def hess_norm(self):
        return 2.0 * abs(self.coef) * float(self.a @ self.a)

    def primal(self, cval):
        return self.w * abs(cval)

    def init_dual(self, cval):
        return float(np.sign(cval))


class AbsBilinearPiece:
    """w * | (u.x)(v.z) + s |  for y = (x, z) split at index d1."""

    is_quadratic = True
    lo, hi = -1.0, 1.0

    def __init__(self, u, v, s, w, d1):
        self.u = np.asarray(u, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.s = float(s)
        self.w = float(w)
        self.d1 = int(d1)

    def c_value(self, y):
        return float(self.u @ y[:self.d1]) * float(self.v @ y[self.d1:]) + self.s

    def hess_add(self, H, scale):
        blk = scale * np.outer(self.u, self.v)
        H[:self.d1, self.d1:] += blk
        H[self.d1:, :self.d1] += blk.T

    def hess_norm(self):
        return float(np.linalg.norm(self.u) * np.linalg.norm(self.v))

    def primal(self, cval):
        return self.w * abs(cval)

    def init_dual(self, cval):
        return float(np.sign(cval))


@dataclass
class SubproblemSpec:
    """Structured description of one strongly convex subproblem.

    ``reg`` acts on the first ``reg_dim`` coordinates (all of them when
    ``reg_dim`` is None); squared-l2 regularizers are folded into the
    quadratic at solve time, so indicators and l1 are the only kinds the
    inner minimization has to treat explicitly.
    """

    dim: int
    h_iso: float
    lin: np.ndarray
    const: float = 0.0
    quad: np.ndarray = None
    pieces: list = field(default_factory=list)
    reg: object = None
    reg_dim: int = None

    def convexity_margin(self):
        """Lower bound on the smallest eigenvalue of H(u) over the dual box."""
        margin = self.h_iso
        if self.quad is not None:
            margin += float(eigh(self.quad, eigvals_only=True)[0])
        margin -= sum(p.w * p.hess_norm() for p in self.pieces)
        return margin


@dataclass
class SolveResult:
    y: np.ndarray
    value: float
    lower_bound: float
    gap: float
    evaluations: int


def _reg_slice(spec):
    n = spec.dim if spec.reg_dim is None else spec.reg_dim
    return slice(0, n)


def _inner_minimize(spec, H_dense, g, reg_kind):
    """argmin of 0.5 y'Hy + g.y (+ indicator/l1 on the reg slice).

    Returns (y, extra_value) where extra_value is the l1 term at y (the
    only regularizer contributing a nonzero finite value here).
    """
    reg = spec.reg
    sl = _reg_slice(spec)
    if H_dense is None:
        h = spec.h_iso
        y = -g / h
        if reg_kind in ("zero", "none"):
            return y, 0.0
        if reg_kind == "l1":
            t = reg.weight
            y[sl] = np.sign(-g[sl]) * np.maximum(np.abs(g[sl]) - t, 0.0) / h
            return y, reg.weight * float(np.sum(np.abs(y[sl])))
        if reg_kind == "indicator-box":
            y[sl] = np.clip(y[sl], reg.lower, reg.upper)
            return y, 0.0
        if reg_kind == "indicator-euclidean-ball":
            norm = np.linalg.norm(y[sl])
            if norm > reg.radius:
                y[sl] *= reg.radius / norm
            return y, 0.0
        raise UnsupportedCombinationError(f"regularizer {reg_kind!r} in isotropic solve")
    # Dense path: only unconstrained and full-dimension ball supported.
    if reg_kind in ("zero", "none"):
        chol = cho_factor(H_dense, check_finite=False)
        return cho_solve(chol, -g, check_finite=False), 0.0
    if reg_kind == "indicator-euclidean-ball" and sl == slice(0, spec.dim):
        return _trust_region_solve(H_dense, g, reg.radius), 0.0
    raise UnsupportedCombinationError(
        f"regularizer {reg_kind!r} with a non-isotropic quadratic")


def _trust_region_solve(H, g, radius):
    """Exact min of 0.5 y'Hy + g.y over the centered ball, H > 0.

    Interior solution if it fits, otherwise the boundary multiplier is
    found from the secular equation via the eigendecomposition of H.
    """
    lam, V = eigh(H, check_finite=False)
    beta = V.T @ g
    y0 = V @ (-beta / lam)
    if np.linalg.norm(y0) <= radius:
        return y0

    def norm_at(nu):
        return float(np.sqrt(np.sum((beta / (lam + nu)) ** 2)))

    lo, hi = 0.0, np.linalg.norm(g) / radius
    while norm_at(hi) > radius:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if norm_at(mid) > radius:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    return V @ (-beta / (lam + nu))


def _fold_squared_l2(spec):
    """Fold a squared-l2 regularizer into the quadratic part."""
    reg = spec.reg
    kind = "none" if reg is None else reg.kind
    if kind != "squared-l2":
        return spec, kind
    sl = _reg_slice(spec)
    full = sl == slice(0, spec.dim)
    if full and spec.quad is None and not any(p.is_quadratic for p in spec.pieces):
        folded = SubproblemSpec(spec.dim, spec.h_iso + reg.weight, spec.lin,
                                spec.const, None, spec.pieces, None, None)
    else:
        quad = np.zeros((spec.dim, spec.dim)) if spec.quad is None else spec.quad.copy()
        idx = np.arange(sl.stop)
        quad[idx, idx] += reg.weight
        folded = SubproblemSpec(spec.dim, spec.h_iso, spec.lin, spec.const,
                                quad, spec.pieces, None, None)
    return folded, "none"


def solve_certified(spec, tol, max_rounds=8, lbfgs_maxiter=500):
    """Solve the subproblem with a certified primal-dual gap <= tol.

    Returns a :class:`SolveResult`; raises :class:`ToleranceNotMetError`
    if the budget is exhausted first and :class:`NonconvexSubproblemError`
    if the strong-convexity margin is not positive.
    """
    spec, reg_kind = _fold_squared_l2(spec)
    if spec.convexity_margin() <= 0:
        raise NonconvexSubproblemError(
            "subproblem is not strongly convex over the dual box")

    pieces = spec.pieces
    npieces = len(pieces)
    needs_dense = spec.quad is not None or any(p.is_quadratic for p in pieces)
    base_H = None
    if needs_dense:
        base_H = np.zeros((spec.dim, spec.dim))
        if spec.quad is not None:
            base_H += spec.quad
        base_H[np.arange(spec.dim), np.arange(spec.dim)] += spec.h_iso

    state = {"best_primal": np.inf, "best_y": None, "best_dual": -np.inf, "evals": 0}

    def evaluate(u):
        state["evals"] += 1
        g = spec.lin.copy()
        k = spec.const
        if needs_dense:
            H = base_H.copy()
        else:
            H = None
        for ui, p in zip(u, pieces):
            coef = ui * p.w
            k += coef * p.s
            if p.is_quadratic:
                p.hess_add(H, coef)
            else:
                g = g + coef * p.g
        y, reg_val = _inner_minimize(spec, H, g, reg_kind)
        cvals = np.array([p.c_value(y) for p in pieces])
        # Dual value q(u) = L(y, u) + r(y).
        if needs_dense:
            quad_val = 0.5 * float(y @ (H @ y))
        else:
            quad_val = 0.5 * spec.h_iso * float(y @ y)
        qval = quad_val + float(g @ y) + k + reg_val
        # Primal value at the recovered point.
        if needs_dense:
            smooth = 0.5 * float(y @ (base_H @ y))
        else:
            smooth = 0.5 * spec.h_iso * float(y @ y)
        primal = smooth + float(spec.lin @ y) + spec.const + reg_val
        primal += sum(p.primal(c) for p, c in zip(pieces, cvals))
        if primal < state["best_primal"]:
            state["best_primal"] = primal
            state["best_y"] = y
        if qval > state["best_dual"]:
            state["best_dual"] = qval
        grad = np.array([p.w * c for p, c in zip(pieces, cvals)])
        return qval, grad

    if npieces == 0:
        evaluate(np.empty(0))
        y = state["best_y"]
        return SolveResult(y, state["best_primal"], state["best_primal"], 0.0, 1)

    bounds = [(p.lo, p.hi) for p in pieces]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    # Warm start from the piece signs at the dual-free minimizer.
    _, g0 = evaluate(np.zeros(npieces))
    u = np.clip(np.array([p.init_dual(c / p.w if p.w else c) for p, c in
                          zip(pieces, g0)]), lo, hi)

    def neg_q(uvec):
        q, grad = evaluate(uvec)
        return -q, -grad

    for round_no in range(max_rounds):
        res = minimize(neg_q, u, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": lbfgs_maxiter, "ftol": 1e-18,
                                "gtol": 1e-14, "maxcor": min(30, npieces)})
        u = np.clip(res.x, lo, hi)
        gap = state["best_primal"] - state["best_dual"]
        if gap <= tol:
            return SolveResult(state["best_y"], state["best_primal"],
                               state["best_dual"], gap, state["evals"])
        # Projected-gradient polish with backtracking before the next round.
        q, grad = evaluate(u)
        step = 1.0
        for _ in range(200):
            cand = np.clip(u + step * grad, lo, hi)
            qc, gc = evaluate(cand)
            if qc > q:
                u, q, grad = cand, qc, gc
                step *= 1.3
            else:
                step *= 0.5
                if step < 1e-18:
                    break
            if state["best_primal"] - state["best_dual"] <= tol:
                break
        gap = state["best_primal"] - state["best_dual"]
        if gap <= tol:
            return SolveResult(state["best_y"], state["best_primal"],
                               state["best_dual"], gap, state["evals"])
    raise ToleranceNotMetError(
        f"certified gap {state['best_primal'] - state['best_dual']:.3e} "
        f"did not reach tol {tol:.3e} after {state['evals']} evaluations")
