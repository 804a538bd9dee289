"""Experiment harness: config, sweeps, envelope traces, verification.

The sweep protocol mirrors the benchmark figures: for each round a fresh
problem instance and initial point are generated, shared by every method
and stepsize in that round (fair comparison); each (method, stepsize,
round) cell then runs `epochs` passes with its own independent sampling
stream and reports the final functional gap and the first pass reaching
the target suboptimality.

Stream layout (pure function of the master seed and cell coordinates):

    instance stream   id = (1 << 48) | round
    init stream       id = (2 << 48) | round
    cell stream       id = (3 << 48) | (round << 32) | (method << 24) | grid

CSV contract: columns ``method,stepsize,round,final_gap,epochs_to_target,
wall_ms,seed``, data rows first (sorted by method order, grid index,
round), then one summary row per (method, stepsize) with ``round = mean``.
Floats are written with shortest round-trip repr.  The wall_ms column is
written as 0 so that identical master seeds produce byte-identical files;
measured timings stay on the in-memory cells and can be dumped to a side
file.

The worker pool (MODELPROX_WORKERS) maps fixed-size cell chunks, so the
output is identical for any worker count.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import problems as pb
from .errors import ConfigValidationError, InvalidParameterError
from .kernels import run_cells
from .oracle import default_pairings, finite_difference_check, run_verification
from .regularizers import Regularizer, zero as zero_reg
from .rng import RngStream, unit_sphere_point
from .stationarity import moreau_envelope

__all__ = ["SweepConfig", "SweepCell", "PRESETS", "load_config", "save_config",
           "make_preset_problem", "run_sweep", "write_sweep_csv",
           "run_envelope_trace", "verify_all", "WORKERS_ENV"]

WORKERS_ENV = "MODELPROX_WORKERS"
_CHUNK = 128

METHODS = ("sgd", "prox-linear", "prox-point")

PRESETS = {
    "phase-10-30": {"kind": "phase-retrieval", "d": 10, "m": 30},
    "phase-50-150": {"kind": "phase-retrieval", "d": 50, "m": 150},
    "phase-100-300": {"kind": "phase-retrieval", "d": 100, "m": 300},
    "blind-10-10-30": {"kind": "blind-deconvolution", "d1": 10, "d2": 10, "m": 30},
    "blind-10-10-50": {"kind": "blind-deconvolution", "d1": 10, "d2": 10, "m": 50},
    "blind-50-50-200": {"kind": "blind-deconvolution", "d1": 50, "d2": 50, "m": 200},
    "blind-100-100-400": {"kind": "blind-deconvolution", "d1": 100, "d2": 100, "m": 400},
}


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep configuration with benchmark defaults."""

    problem: dict = field(default_factory=lambda: dict(PRESETS["phase-10-30"]))
    methods: tuple = METHODS
    stepsize_count: int = 100
    stepsize_min: float = 1e-4
    stepsize_max: float = 1.0
    stepsize_spacing: str = "linear"
    epochs: int = 100
    rounds: int = 15
    target: float = 1e-4
    master_seed: int = 12345
    output: str = "sweep.csv"
    regularizer: dict = field(default_factory=lambda: {"kind": "zero"})

    def grid(self):
        if self.stepsize_spacing == "linear":
            return np.linspace(self.stepsize_min, self.stepsize_max,
                               self.stepsize_count)
        return np.logspace(np.log10(self.stepsize_min),
                           np.log10(self.stepsize_max), self.stepsize_count)

    def to_dict(self):
        return {
            "problem": dict(self.problem),
            "methods": list(self.methods),
            "stepsize": {"count": self.stepsize_count, "min": self.stepsize_min,
                         "max": self.stepsize_max, "spacing": self.stepsize_spacing},
            "epochs": self.epochs,
            "rounds": self.rounds,
            "target": self.target,
            "master_seed": self.master_seed,
            "output": self.output,
            "regularizer": dict(self.regularizer),
        }


@dataclass
class SweepCell:
    """One (method, stepsize, round) run of a sweep."""

    method: str
    stepsize: float
    round_index: int
    final_gap: float
    epochs_to_target: int
    wall_ms: float
    stream_id: int


def _validate(cfg):
    if not cfg.stepsize_count >= 1:
        raise ConfigValidationError("stepsize.count", "must be >= 1")
    if not cfg.stepsize_min > 0:
        raise ConfigValidationError("stepsize.min", "must be positive")
    if not cfg.stepsize_min < cfg.stepsize_max:
        raise ConfigValidationError("stepsize.min", "must be below stepsize.max")
    if cfg.stepsize_spacing not in ("linear", "log"):
        raise ConfigValidationError("stepsize.spacing", "must be linear or log")
    if not cfg.epochs >= 1:
        raise ConfigValidationError("epochs", "must be >= 1")
    if not cfg.rounds >= 1:
        raise ConfigValidationError("rounds", "must be >= 1")
    if not cfg.target > 0:
        raise ConfigValidationError("target", "must be positive")
    for meth in cfg.methods:
        if meth not in METHODS:
            raise ConfigValidationError("methods", f"unknown method {meth!r}")
    kind = cfg.problem.get("kind")
    if cfg.problem.get("preset") is None and kind not in ("phase-retrieval",
                                                          "blind-deconvolution"):
        raise ConfigValidationError("problem.kind",
                                    f"no sweep support for {kind!r}")
    Regularizer.from_config(cfg.regularizer)
    return cfg


def _config_from_dict(data):
    cfg = SweepConfig()
    problem = data.get("problem", cfg.problem)
    if isinstance(problem, dict) and "preset" in problem:
        name = problem["preset"]
        if name not in PRESETS:
            raise ConfigValidationError("problem.preset", f"unknown preset {name!r}")
        problem = dict(PRESETS[name])
    step = data.get("stepsize", {})
    return _validate(replace(
        cfg,
        problem=dict(problem),
        methods=tuple(data.get("methods", cfg.methods)),
        stepsize_count=int(step.get("count", cfg.stepsize_count)),
        stepsize_min=float(step.get("min", cfg.stepsize_min)),
        stepsize_max=float(step.get("max", cfg.stepsize_max)),
        stepsize_spacing=step.get("spacing", cfg.stepsize_spacing),
        epochs=int(data.get("epochs", cfg.epochs)),
        rounds=int(data.get("rounds", cfg.rounds)),
        target=float(data.get("target", cfg.target)),
        master_seed=int(data.get("master_seed", cfg.master_seed)),
        output=data.get("output", cfg.output),
        regularizer=dict(data.get("regularizer", cfg.regularizer)),
    ))


def load_config(path):
    """Load a sweep config; an empty file yields the full defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return _validate(SweepConfig())
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError(
            "json", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return _config_from_dict(data)


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def make_preset_problem(spec, rng):
    """Generate the instance described by a problem dict or preset name."""
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise InvalidParameterError(f"unknown preset {spec!r}")
        spec = PRESETS[spec]
    kind = spec["kind"]
    if kind == "phase-retrieval":
        return pb.generate_phase_retrieval(rng, spec["d"], spec["m"])
    if kind == "blind-deconvolution":
        return pb.generate_blind_deconvolution(rng, spec["d1"], spec["d2"], spec["m"])
    if kind == "lad":
        return pb.generate_lad(rng, spec["d"], spec["m"], spec.get("mu", 0.0))
    if kind == "cvar":
        return pb.generate_cvar(rng, spec["d"], spec["m"], spec["alpha"],
                                spec.get("mu", 0.0))
    raise InvalidParameterError(f"unknown problem kind {kind!r}")


def _instance_stream(seed, rnd):
    return RngStream(seed, (1 << 48) | rnd)


def _init_stream(seed, rnd):
    return RngStream(seed, (2 << 48) | rnd)


def cell_stream_id(method_idx, grid_idx, rnd):
    return (3 << 48) | (rnd << 32) | (method_idx << 24) | grid_idx


def _initial_point(problem, rng):
    if problem.kind == "blind-deconvolution":
        x0 = unit_sphere_point(rng, problem.d1)
        y0 = unit_sphere_point(rng, problem.d2)
        return np.concatenate([x0, y0])
    return unit_sphere_point(rng, problem.dim)


def run_sweep(config, write_csv=True, timing_path=None):
    """Execute the sweep; returns (cells, summary) and writes the CSV.

    One cell per (method, grid point, round).  Diverged runs are recorded
    with final_gap = NaN and the epochs-to-target sentinel -1, never
    raised.
    """
    cfg = _validate(config)
    grid = cfg.grid()
    T = cfg.epochs * _problem_m(cfg)
    workers = int(os.environ.get(WORKERS_ENV, "1") or "1")
    cells = []
    for rnd in range(cfg.rounds):
        problem = make_preset_problem(cfg.problem, _instance_stream(cfg.master_seed, rnd))
        x0 = _initial_point(problem, _init_stream(cfg.master_seed, rnd))
        for mi, method in enumerate(cfg.methods):
            method_idx = METHODS.index(method)
            stream_ids = [cell_stream_id(method_idx, g, rnd)
                          for g in range(len(grid))]
            idx = np.empty((len(grid), T), dtype=np.int64)
            for g, sid in enumerate(stream_ids):
                idx[g] = RngStream(cfg.master_seed, sid).integers(problem.m, size=T)
            chunks = [(k, min(k + _CHUNK, len(grid))) for k in range(0, len(grid), _CHUNK)]

            def job(span):
                lo, hi = span
                t0 = time.perf_counter()
                gaps, hits, _ = run_cells(problem, method, x0, grid[lo:hi],
                                          idx[lo:hi], cfg.epochs, cfg.target)
                dt = (time.perf_counter() - t0) * 1000.0 / (hi - lo)
                return lo, gaps, hits, dt

            if workers > 1 and len(chunks) > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(job, chunks))
            else:
                results = [job(c) for c in chunks]
            for lo, gaps, hits, dt in results:
                for off, (gap, hit) in enumerate(zip(gaps, hits)):
                    g = lo + off
                    cells.append(SweepCell(method, float(grid[g]), rnd,
                                           float(gap), int(hit), dt,
                                           stream_ids[g]))
    cells.sort(key=lambda c: (cfg.methods.index(c.method),
                              _grid_index(grid, c.stepsize), c.round_index))
    summary = _summarize(cfg, grid, cells)
    if write_csv:
        write_sweep_csv(cfg.output, cells, summary)
    if timing_path:
        with open(timing_path, "w", encoding="utf-8") as fh:
            for c in cells:
                fh.write(f"{c.method},{c.stepsize!r},{c.round_index},{c.wall_ms!r}\n")
    return cells, summary


def _problem_m(cfg):
    return cfg.problem["m"]


def _grid_index(grid, value):
    return int(np.argmin(np.abs(grid - value)))


def _summarize(cfg, grid, cells):
    """Mean final gap and mean epochs-to-target per (method, stepsize)."""
    summary = []
    for method in cfg.methods:
        for g, step in enumerate(grid):
            rows = [c for c in cells
                    if c.method == method and _grid_index(grid, c.stepsize) == g]
            gaps = np.array([c.final_gap for c in rows])
            mean_gap = float(np.mean(gaps))
            reached = [c.epochs_to_target for c in rows if c.epochs_to_target >= 0]
            mean_hit = float(np.mean(reached)) if reached else -1.0
            summary.append((method, float(step), mean_gap, mean_hit))
    return summary


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_sweep_csv(path, cells, summary):
    """Fixed-schema CSV; wall_ms written as 0 for byte-determinism."""
    lines = ["method,stepsize,round,final_gap,epochs_to_target,wall_ms,seed"]
    for c in cells:
        lines.append(",".join([c.method, _fmt(c.stepsize), str(c.round_index),
                               _fmt(c.final_gap), str(c.epochs_to_target),
                               "0", str(c.stream_id)]))
    for method, step, mean_gap, mean_hit in summary:
        lines.append(",".join([method, _fmt(step), "mean", _fmt(mean_gap),
                               _fmt(mean_hit), "0", ""]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_envelope_trace(problem_spec, method, stepsize, epochs, checkpoints,
                       seed, out=None, inner_tol=1e-8):
    """Envelope stationarity along one seeded run.

    Steps the chosen method at a fixed stepsize (beta = 1/stepsize) for
    `epochs` passes and evaluates the Moreau envelope (lam = 1/(2 rho))
    at the iterates of the listed checkpoint epochs.  Returns the rows
    (epoch, lambda, envelope_value, grad_norm, inner_suboptimality) and
    optionally writes them as CSV.
    """
    problem = make_preset_problem(problem_spec, _instance_stream(seed, 0))
    x0 = _initial_point(problem, _init_stream(seed, 0))
    method_idx = METHODS.index(method)
    sid = cell_stream_id(method_idx, 0, 0)
    T = epochs * problem.m
    idx = RngStream(seed, sid).integers(problem.m, size=T).reshape(1, T)
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if any(c < 0 or c > epochs for c in checkpoints):
        raise InvalidParameterError("checkpoints must lie in [0, epochs]")
    snaps = {0: x0.copy()}
    state = x0.copy()
    for e in range(epochs):
        block = idx[:, e * problem.m:(e + 1) * problem.m]
        state = _state_after(problem, method, state, np.array([stepsize]), block)[0]
        if e + 1 in checkpoints:
            snaps[e + 1] = state.copy()
    rho = problem.constants.rho
    lam = 1.0 / (2.0 * rho) if rho > 0 else 1.0
    rows = []
    for e in checkpoints:
        rep = moreau_envelope(problem, zero_reg(), snaps[e], lam, inner_tol)
        rows.append((e, lam, rep.envelope_value, rep.grad_norm,
                     rep.inner_suboptimality))
    if out:
        lines = ["epoch,lambda,envelope_value,grad_norm,inner_suboptimality"]
        for row in rows:
            lines.append(",".join([str(row[0])] + [_fmt(float(v)) for v in row[1:]]))
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    return rows


def _state_after(problem, method, x0, steps, idx_block):
    """One epoch of the kernel, returning the state matrix."""
    from . import kernels as _k
    G = steps.shape[0]
    X = np.tile(np.asarray(x0, dtype=float), (G, 1))
    m = problem.m
    with np.errstate(all="ignore"):
        for s in range(idx_block.shape[1]):
            i = idx_block[:, s]
            if problem.kind == "phase-retrieval":
                a = problem.A[i]
                bi = problem.b[i]
                an2 = np.sum(a * a, axis=1)
                if method == "sgd":
                    _k._phase_step_sgd(X, a, bi, an2, steps)
                elif method == "prox-linear":
                    _k._phase_step_proxlinear(X, a, bi, an2, steps)
                else:
                    _k._phase_step_proxpoint(X, a, bi, an2, steps)
            else:
                u, v = problem.U[i], problem.V[i]
                bi = problem.b[i]
                un2 = np.sum(u * u, axis=1)
                vn2 = np.sum(v * v, axis=1)
                if method == "sgd":
                    _k._blind_step_sgd(X, u, v, bi, un2, vn2, problem.d1, steps)
                elif method == "prox-linear":
                    _k._blind_step_proxlinear(X, u, v, bi, un2, vn2, problem.d1, steps)
                else:
                    _k._blind_step_proxpoint(X, u, v, bi, un2, vn2, problem.d1, steps)
    return X


def verify_all(pairings=None, extra_checks=True):
    """Run the oracle registry plus the invariant batches.

    Returns (reports, ok); the CLI maps ok to the exit status.
    """
    reports = run_verification(pairings)
    if extra_checks:
        reports.extend(_invariant_reports())
    ok = all(r.passed for r in reports)
    return reports, ok


def _invariant_reports():
    from .oracle import OracleReport
    rng = RngStream(777, 0)
    out = []

    # Prox nonexpansiveness on random pairs for each convex kind.
    worst = 0.0
    regs = [zero_reg(), Regularizer.from_config({"kind": "indicator-euclidean-ball", "radius": 1.0}),
            Regularizer.from_config({"kind": "l1", "weight": 0.7}),
            Regularizer.from_config({"kind": "squared-l2", "weight": 2.0})]
    for reg in regs:
        for _ in range(200):
            x = rng.standard_normal(4)
            y = rng.standard_normal(4)
            step = 0.1 + rng.uniform_open(1)[0]
            d = np.linalg.norm(reg.prox(x, step) - reg.prox(y, step))
            worst = max(worst, d - np.linalg.norm(x - y))
    out.append(OracleReport("prox_nonexpansive", 800, float(max(worst, 0.0)),
                            "", worst <= 1e-12, 1e-12))

    # Subgradient selections match central differences at smooth points.
    worst = 0.0
    prob = pb.generate_phase_retrieval(rng, 4, 8)
    for _ in range(50):
        x = rng.standard_normal(4)
        i = int(rng.integers(8))
        g = pb.stochastic_subgradient(prob, x, i).vector
        res = finite_difference_check(lambda z: pb.datum_value(prob, i, z), x, g, 1e-6)
        worst = max(worst, res)
    out.append(OracleReport("subgradient_fd_phase", 50, float(worst), "",
                            worst <= 1e-4, 1e-4))
    return out
