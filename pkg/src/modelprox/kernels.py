"""Vectorized sweep kernels: many cells of one method stepped in lockstep.

Each cell is one (stepsize, round) run on a shared problem instance and
initial point.  State is a (cells, dim) matrix advanced one stochastic
step at a time with row-local elementwise operations, so a cell's
arithmetic never depends on which other cells share its batch; chunking
for a worker pool cannot change results.

The prox-linear and proximal point updates are the closed forms of the
problems module, vectorized verbatim; the stepsize grid intentionally
reaches beta = 1/stepsize below the weak-convexity modulus (the
enumeration solves the subproblem globally for every beta > 0, which is
what makes the whole grid runnable).  Diverged cells (non-finite state,
which the subgradient method produces at large stepsizes) are frozen and
reported as NaN objectives; companion matrices of frozen rows are
replaced by the identity so the batched eigensolve stays finite.
"""

import numpy as np

from .errors import InvalidParameterError

__all__ = ["run_cells"]

_IMAG_TOL = 1e-7
_NEWTON_ITERS = 40


def _phase_objective(A, b, X):
    P = X @ A.T
    return np.abs(P * P - b).mean(axis=1)


def _blind_objective(U, V, b, X, d1):
    P = (X[:, :d1] @ U.T) * (X[:, d1:] @ V.T)
    return np.abs(P - b).mean(axis=1)


def _phase_step_sgd(X, a, bi, an2, step):
    dot = (a * X).sum(axis=1)
    s = np.sign(dot * dot - bi)
    X -= ((2.0 * step * s) * dot)[:, None] * a


def _phase_step_proxlinear(X, a, bi, an2, lam):
    dot = (a * X).sum(axis=1)
    gamma = lam * (dot * dot - bi)
    zn2 = 4.0 * lam * lam * dot * dot * an2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(zn2 > 0.0, -gamma / zn2, 0.0)
    t = np.clip(t, -1.0, 1.0)
    X += ((2.0 * lam * t) * dot)[:, None] * a


def _phase_step_proxpoint(X, a, bi, an2, lam):
    # Candidates along a: y = x + c*a; enumeration order fixed
    # (smooth +, smooth -, root +sqrt(b), root -sqrt(b), base).
    dot = (a * X).sum(axis=1)
    sq = np.sqrt(bi)
    den_p = 2.0 * lam * an2 + 1.0
    den_m = 2.0 * lam * an2 - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        cands = np.stack([
            -2.0 * lam * dot / den_p,
            np.where(den_m != 0.0, -2.0 * lam * dot / den_m, np.nan),
            -(dot - sq) / an2,
            -(dot + sq) / an2,
            np.zeros_like(dot),
        ])
        t_new = dot + cands * an2
        vals = np.abs(t_new * t_new - bi) + (cands * cands * an2) / (2.0 * lam)
    vals = np.where(np.isnan(vals), np.inf, vals)
    pick = np.argmin(vals, axis=0)
    c = np.take_along_axis(cands, pick[None, :], axis=0)[0]
    X += c[:, None] * a


def _batched_quartic_roots(monic):
    """Real roots of batched monic quartics (rows of degree-4 coeffs
    [1, c3, c2, c1, c0]); invalid roots reported as +inf, sorted last."""
    G = monic.shape[0]
    C = np.zeros((G, 4, 4))
    C[:, 0, :] = -monic[:, 1:]
    idx = np.arange(3)
    C[:, idx + 1, idx] = 1.0
    bad = ~np.isfinite(monic).all(axis=1)
    if bad.any():
        C[bad] = np.eye(4)
    z = np.linalg.eigvals(C)  # (G, 4) complex
    coef = monic[:, :, None]
    for _ in range(_NEWTON_ITERS):
        p = np.full_like(z, coef[:, 0])
        dp = np.zeros_like(z)
        for k in range(1, 5):
            dp = dp * z + p
            p = p * z + coef[:, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dp != 0.0, p / dp, 0.0)
        z = z - step
    real_ok = np.abs(z.imag) <= _IMAG_TOL * (1.0 + np.abs(z))
    roots = np.where(real_ok, z.real, np.inf)
    roots[bad] = np.inf
    return np.sort(roots, axis=1)


def _blind_step_sgd(X, u, v, bi, un2, vn2, d1, step):
    du = (u * X[:, :d1]).sum(axis=1)
    dv = (v * X[:, d1:]).sum(axis=1)
    s = np.sign(du * dv - bi)
    X[:, :d1] -= (step * s * dv)[:, None] * u
    X[:, d1:] -= (step * s * du)[:, None] * v


def _blind_step_proxlinear(X, u, v, bi, un2, vn2, d1, lam):
    du = (u * X[:, :d1]).sum(axis=1)
    dv = (v * X[:, d1:]).sum(axis=1)
    gamma = lam * (du * dv - bi)
    zn2 = lam * lam * (dv * dv * un2 + du * du * vn2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(zn2 > 0.0, -gamma / zn2, 0.0)
    t = np.clip(t, -1.0, 1.0)
    X[:, :d1] += (t * lam * dv)[:, None] * u
    X[:, d1:] += (t * lam * du)[:, None] * v


def _blind_step_proxpoint(X, u, v, bi, un2, vn2, d1, lam):
    # Candidates (x, y) = (x0 + p*u, y0 + q*v); order: smooth +, smooth -,
    # quartic roots ascending, base.
    du = (u * X[:, :d1]).sum(axis=1)
    dv = (v * X[:, d1:]).sum(axis=1)
    denom = 1.0 - lam * lam * un2 * vn2
    with np.errstate(divide="ignore", invalid="ignore"):
        p_list = [np.where(denom != 0.0, -lam * (s * dv - lam * vn2 * du) / denom, np.nan)
                  for s in (1.0, -1.0)]
        q_list = [np.where(denom != 0.0, -lam * (s * du - lam * un2 * dv) / denom, np.nan)
                  for s in (1.0, -1.0)]
        monic = np.stack([
            np.ones_like(du),
            -du,
            np.zeros_like(du),
            bi * un2 * dv / vn2,
            -bi * bi * un2 / vn2,
        ], axis=1)
        roots = _batched_quartic_roots(monic)
        tiny = 1e-12 * np.maximum(1.0, np.abs(du))
        for k in range(4):
            eta = roots[:, k]
            ok = np.isfinite(eta) & (np.abs(eta) > tiny) & (bi != 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = (eta * du - eta * eta) / (bi * un2)
                p = np.where(ok, -g * bi / eta, np.nan)
                q = np.where(ok, -g * eta, np.nan)
            p_list.append(p)
            q_list.append(q)
        p_list.append(np.zeros_like(du))
        q_list.append(np.zeros_like(du))
        P = np.stack(p_list)
        Q = np.stack(q_list)
        prod = (du + P * un2) * (dv + Q * vn2)
        vals = np.abs(prod - bi) + (P * P * un2 + Q * Q * vn2) / (2.0 * lam)
    vals = np.where(np.isnan(vals), np.inf, vals)
    pick = np.argmin(vals, axis=0)
    p = np.take_along_axis(P, pick[None, :], axis=0)[0]
    q = np.take_along_axis(Q, pick[None, :], axis=0)[0]
    X[:, :d1] += p[:, None] * u
    X[:, d1:] += q[:, None] * v


def run_cells(problem, method, x0, stepsizes, datum_indices, epochs, target):
    """Run one batch of cells of a single method for `epochs` passes.

    Parameters
    ----------
    problem : ProblemInstance (phase-retrieval or blind-deconvolution)
    method : "sgd" | "prox-linear" | "prox-point"
    x0 : shared initial point
    stepsizes : (cells,) step-size grid values (beta_t^{-1})
    datum_indices : (cells, epochs*m) pre-drawn datum indices per cell
    epochs, target : pass count and functional suboptimality target

    Returns
    -------
    final_gap : (cells,) objective after the last pass (NaN = diverged)
    epochs_to_target : (cells,) first pass count reaching target, -1 if never
    objectives : (cells, epochs+1) per-pass exact objectives
    """
    steps = np.asarray(stepsizes, dtype=float)
    G = steps.shape[0]
    m = problem.m
    X = np.tile(np.asarray(x0, dtype=float), (G, 1))
    idx = np.asarray(datum_indices)
    if idx.shape != (G, epochs * m):
        raise InvalidParameterError("datum_indices must be (cells, epochs*m)")

    if problem.kind == "phase-retrieval":
        A, b = problem.A, problem.b
        an2_all = np.sum(A * A, axis=1)
        objective = lambda Xc: _phase_objective(A, b, Xc)
    elif problem.kind == "blind-deconvolution":
        U, V, b, d1 = problem.U, problem.V, problem.b, problem.d1
        un2_all = np.sum(U * U, axis=1)
        vn2_all = np.sum(V * V, axis=1)
        objective = lambda Xc: _blind_objective(U, V, b, Xc, d1)
    else:
        raise InvalidParameterError(f"no sweep kernel for kind {problem.kind!r}")

    objs = np.empty((G, epochs + 1))
    objs[:, 0] = objective(X)
    hits = np.where(objs[:, 0] <= target, 0, -1)

    with np.errstate(all="ignore"):
        for e in range(epochs):
            for s in range(m):
                i = idx[:, e * m + s]
                if problem.kind == "phase-retrieval":
                    a = A[i]
                    bi = b[i]
                    an2 = an2_all[i]
                    if method == "sgd":
                        _phase_step_sgd(X, a, bi, an2, steps)
                    elif method == "prox-linear":
                        _phase_step_proxlinear(X, a, bi, an2, steps)
                    elif method == "prox-point":
                        _phase_step_proxpoint(X, a, bi, an2, steps)
                    else:
                        raise InvalidParameterError(f"unknown method {method!r}")
                else:
                    u, v = U[i], V[i]
                    bi = b[i]
                    un2, vn2 = un2_all[i], vn2_all[i]
                    if method == "sgd":
                        _blind_step_sgd(X, u, v, bi, un2, vn2, d1, steps)
                    elif method == "prox-linear":
                        _blind_step_proxlinear(X, u, v, bi, un2, vn2, d1, steps)
                    elif method == "prox-point":
                        _blind_step_proxpoint(X, u, v, bi, un2, vn2, d1, steps)
                    else:
                        raise InvalidParameterError(f"unknown method {method!r}")
            obj = objective(X)
            obj = np.where(np.isfinite(obj), obj, np.nan)
            objs[:, e + 1] = obj
            fresh = (hits < 0) & np.isfinite(obj) & (obj <= target)
            hits[fresh] = e + 1

    final = objs[:, -1].copy()
    return final, hits, objs
