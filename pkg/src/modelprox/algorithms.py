"""The two stochastic iteration loops and their control sequences.

``run_psg`` is the proximal stochastic subgradient method:

    x_{t+1} = prox_{alpha_t r}(x_t - alpha_t G(x_t, xi_t)),  t = 0..T,

returning x_{t*} with t* drawn from P(t*=t) = alpha_t / sum alpha_i.

``run_model_based`` is the general model-based iteration

    x_{t+1} = argmin_x { r(x) + f_{x_t}(x, xi_t) + (beta_t/2)||x-x_t||^2 },

with t* drawn proportionally to (rho_bar - tau - eta)/(beta_t - eta).
With the linear family and alpha_t = 1/beta_t the two loops perform the
identical update and draw identical streams, so their records agree
bitwise under shared (seed, stream).

Run protocol (fixed; reproducibility depends on it): a run draws, in
order, (1) t* from the schedule's selection weights, (2) the block of T+1
datum indices, then iterates.  One epoch is m single-sample steps, and
objective snapshots are taken every m steps on the exact finite sum.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import problems as pb
from .errors import (DivergedRunError, InvalidParameterError,
                     TrajectoryNotRetainedError)
from .models import ModelFamily, family_eta, family_tau, model_step

__all__ = ["Schedule", "RunRecord", "make_schedule", "run_psg",
           "run_model_based", "select_iterate", "weighted_average"]


@dataclass(frozen=True)
class Schedule:
    """Per-iteration control sequence plus iterate-selection weights.

    ``alphas`` and ``betas`` are elementwise reciprocal views of the same
    sequence; ``weights`` are nonnegative and sum to one.
    """

    kind: str
    alphas: np.ndarray
    betas: np.ndarray
    weights: np.ndarray
    gamma: float = 0.0
    rho_bar: float = 0.0
    mu: float = 0.0
    eta: float = 0.0

    @property
    def steps(self):
        return len(self.alphas)


def make_schedule(kind, T, gamma=None, rho_bar=None, mu=None,
                  tau=0.0, eta=0.0, alphas=None, betas=None):
    """Build a Schedule for T+1 steps (t = 0..T).

    kinds:
      constant-alpha    alpha_t = gamma / sqrt(T+1); weights prop. alpha_t
      constant-beta     beta_t = rho_bar + sqrt(T+1)/gamma;
                        weights prop. (rho_bar - tau - eta)/(beta_t - eta)
      strongly-convex   beta_t = mu (t+1)/2; weights prop. 1/(beta_t + mu)
                        (the analysis takes eta = -mu)
      custom            explicit alphas or betas; uniform weights unless
                        eta is given, then prop. 1/(beta_t - eta)
    """
    if not T > 0:
        raise InvalidParameterError("T must be positive")
    n = T + 1
    if kind == "constant-alpha":
        if gamma is None or not gamma > 0:
            raise InvalidParameterError("constant-alpha needs gamma > 0")
        alphas = np.full(n, gamma / np.sqrt(n))
        weights = alphas / alphas.sum()
        return Schedule(kind, alphas, 1.0 / alphas, weights, gamma=gamma)
    if kind == "constant-beta":
        if gamma is None or not gamma > 0:
            raise InvalidParameterError("constant-beta needs gamma > 0")
        if rho_bar is None or not rho_bar > tau + eta:
            raise InvalidParameterError("constant-beta needs rho_bar > tau + eta")
        betas = np.full(n, rho_bar + np.sqrt(n) / gamma)
        weights = (rho_bar - tau - eta) / (betas - eta)
        weights = weights / weights.sum()
        return Schedule(kind, 1.0 / betas, betas, weights, gamma=gamma,
                        rho_bar=rho_bar, eta=eta)
    if kind == "strongly-convex":
        if mu is None or not mu > 0:
            raise InvalidParameterError("strongly-convex needs mu > 0")
        betas = mu * (np.arange(n) + 1.0) / 2.0
        weights = 1.0 / (betas + mu)
        weights = weights / weights.sum()
        return Schedule(kind, 1.0 / betas, betas, weights, mu=mu, eta=-mu)
    if kind == "custom":
        if alphas is None and betas is None:
            raise InvalidParameterError("custom schedule needs alphas or betas")
        if alphas is None:
            betas = np.asarray(betas, dtype=float)
            alphas = 1.0 / betas
        else:
            alphas = np.asarray(alphas, dtype=float)
            betas = 1.0 / alphas
        if len(alphas) != n:
            raise InvalidParameterError("sequence length must be T+1")
        if np.any(alphas <= 0):
            raise InvalidParameterError("stepsizes must be positive")
        weights = 1.0 / (betas - eta)
        weights = weights / weights.sum()
        return Schedule(kind, alphas, betas, weights, eta=eta)
    raise InvalidParameterError(f"unknown schedule kind {kind!r}")


@dataclass
class RunRecord:
    """One algorithm trajectory.

    ``iterates`` holds the per-epoch snapshots (x_0, x_m, x_2m, ...);
    the full trajectory (x_0..x_{T+1}) is retained only when requested.
    ``objective_per_epoch`` is phi = f + r on the exact finite sum, one
    entry per snapshot including the initial point.
    """

    iterates: np.ndarray
    snapshot_steps: np.ndarray
    objective_per_epoch: np.ndarray
    t_star: int
    x_star: np.ndarray
    final_iterate: np.ndarray
    alphas: np.ndarray
    seed: int
    stream_id: int
    wall_time: float
    trajectory: np.ndarray = None
    averaged_iterate: np.ndarray = None
    subgradient_sq_sum: float = 0.0
    steps: int = 0


def _phi(problem, reg, x):
    return pb.objective_value(problem, x) + reg.value(x)


def _run_loop(problem, reg, schedule, x0, rng, step_fn, *,
              retain_trajectory=False, snapshot_stride=None,
              datum_indices=None, track_subgradient_moment=False):
    x = problem.check_point(x0).copy()
    n = schedule.steps
    m = problem.m
    stride = m if snapshot_stride is None else int(snapshot_stride)
    t_star = rng.categorical(schedule.weights)
    if datum_indices is None:
        idx = rng.integers(m, size=n)
    else:
        idx = np.asarray(datum_indices)
        if len(idx) < n:
            raise InvalidParameterError("datum_indices shorter than the run")
    start = time.perf_counter()
    snaps, snap_steps, objs = [x.copy()], [0], [_phi(problem, reg, x)]
    traj = [x.copy()] if retain_trajectory else None
    x_star = x.copy() if t_star == 0 else None
    gsq = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n):
            if track_subgradient_moment:
                g = pb.stochastic_subgradient(problem, x, int(idx[t]))
                gsq += float(g.vector @ g.vector)
            x = step_fn(x, int(idx[t]), t)
            if not np.all(np.isfinite(x)):
                raise DivergedRunError(t)
            if retain_trajectory:
                traj.append(x.copy())
            if t + 1 == t_star:
                x_star = x.copy()
            if (t + 1) % stride == 0 or t + 1 == n:
                if snap_steps[-1] != t + 1:
                    snaps.append(x.copy())
                    snap_steps.append(t + 1)
                    objs.append(_phi(problem, reg, x))
    wall = time.perf_counter() - start
    return RunRecord(
        iterates=np.array(snaps),
        snapshot_steps=np.array(snap_steps),
        objective_per_epoch=np.array(objs),
        t_star=t_star,
        x_star=x_star,
        final_iterate=x.copy(),
        alphas=schedule.alphas.copy(),
        seed=rng.seed,
        stream_id=rng.stream_id,
        wall_time=wall,
        trajectory=np.array(traj) if retain_trajectory else None,
        subgradient_sq_sum=gsq,
        steps=n,
    )


def run_psg(problem, reg, schedule, x0, rng, *, retain_trajectory=False,
            snapshot_stride=None, datum_indices=None,
            track_subgradient_moment=False, allow_large_gamma=False):
    """Proximal stochastic subgradient method (alpha-driven loop)."""
    rho = problem.constants.rho
    if (not allow_large_gamma and schedule.kind == "constant-alpha"
            and rho > 0 and schedule.gamma > 1.0 / (2.0 * rho)):
        warnings.warn(
            "constant-alpha gamma exceeds 1/(2 rho); the proximal rate "
            "guarantee assumes gamma in (0, 1/(2 rho)]", stacklevel=2)

    def step(x, i, t):
        g = pb.stochastic_subgradient(problem, x, i).vector
        alpha = schedule.alphas[t]
        return reg.prox(x - alpha * g, alpha)

    return _run_loop(problem, reg, schedule, x0, rng, step,
                     retain_trajectory=retain_trajectory,
                     snapshot_stride=snapshot_stride,
                     datum_indices=datum_indices,
                     track_subgradient_moment=track_subgradient_moment)


def run_model_based(problem, reg, family, schedule, x0, rng, *,
                    retain_trajectory=False, snapshot_stride=None,
                    datum_indices=None, track_subgradient_moment=False):
    """Stochastic model-based minimization (beta-driven loop)."""
    if isinstance(family, str):
        family = ModelFamily.from_config(family)
    eta = family_eta(problem, family)

    def step(x, i, t):
        return model_step(family, problem, reg, x, i, schedule.betas[t])

    # Fail fast on a schedule that would violate beta > eta at any step.
    if np.any(schedule.betas <= eta):
        from .errors import NonconvexSubproblemError
        raise NonconvexSubproblemError(
            f"schedule betas must exceed the model weak-convexity modulus {eta}")
    return _run_loop(problem, reg, schedule, x0, rng, step,
                     retain_trajectory=retain_trajectory,
                     snapshot_stride=snapshot_stride,
                     datum_indices=datum_indices,
                     track_subgradient_moment=track_subgradient_moment)


def select_iterate(trajectory, weights, rng):
    """Draw (t*, x_{t*}) from a retained trajectory.

    ``weights`` must be normalized over indices 0..len(weights)-1 with
    len(weights) <= len(trajectory).
    """
    trajectory = np.asarray(trajectory)
    if trajectory.size == 0:
        raise InvalidParameterError("empty trajectory")
    w = np.asarray(weights, dtype=float)
    if len(w) > len(trajectory):
        raise InvalidParameterError("more weights than iterates")
    t = rng.categorical(w)
    return t, trajectory[t].copy()


def weighted_average(record, mode):
    """The theorem averages over a retained trajectory x_0..x_{T+1}.

    mode "uniform": (1/sum alpha) sum_t alpha_t x_{t+1}  (plain average of
    x_1..x_{T+1} for a constant schedule).
    mode "strongly-convex": (2/((T+2)(T+3)-2)) sum_{t=1}^{T+1} (t+1) x_t.
    """
    if record.trajectory is None:
        raise TrajectoryNotRetainedError("run was made without retain_trajectory")
    traj = record.trajectory
    T = record.steps - 1
    if mode == "uniform":
        w = record.alphas
        w = w / w.sum()
        return (w[:, None] * traj[1:T + 2]).sum(axis=0)
    if mode == "strongly-convex":
        t = np.arange(1, T + 2)
        w = (t + 1).astype(float)
        w = w / w.sum()
        return (w[:, None] * traj[1:T + 2]).sum(axis=0)
    raise InvalidParameterError(f"unknown averaging mode {mode!r}")
