"""Independent brute-force verifiers for every closed form.

Three oracles, deliberately ignorant of the closed-form solvers they
check:

* :func:`grid_minimize` -- exhaustive lattice evaluation plus local
  golden-section refinement, for 1-D and 2-D subproblems.  The lattice
  pitch is capped (the coarse pass only has to land in the right basin
  of the strongly convex subproblems it is used on); the refinement
  drives the localization down to the requested ``resolution`` and
  beyond.
* :func:`generic_prox_subproblem` -- the certified dual solver applied to
  a structured sampled model; returns the step minimizer with a
  certified suboptimality, never consulting candidate enumerations or
  clip formulas.
* :func:`finite_difference_check` -- central differences at smooth
  points, validating subgradient selections.

``default_pairings`` registers one (closed form, oracle) pair per step
operation; :func:`run_verification` executes a registry and reports one
:class:`OracleReport` per pairing.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import problems as pb
from .errors import InvalidParameterError
from .models import ModelFamily, SampledModel, family_eta
from .regularizers import zero as zero_reg
from .rng import RngStream
from .subproblems import SubproblemSpec, solve_certified

__all__ = ["OracleReport", "grid_minimize", "generic_prox_subproblem",
           "finite_difference_check", "default_pairings", "faulted_pairings",
           "run_verification", "Pairing"]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_LATTICE_1D = 200001
_MAX_LATTICE_2D = 401


def _golden_section(fn, lo, hi, iters=120):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
        if b - a <= 1e-15 * (1.0 + abs(a) + abs(b)):
            break
    x = 0.5 * (a + b)
    return x, fn(x)


def grid_minimize(fn, box, resolution):
    """Brute-force minimizer over a finite box.

    1-D: ``box = (lo, hi)``, ``fn`` maps an ndarray of points to values.
    2-D: ``box = ((lo1, hi1), (lo2, hi2))``, ``fn(X, Y)`` broadcasts.

    Exhaustive lattice evaluation followed by golden-section refinement
    (along the axis in 1-D; cyclically along the axes and both diagonals
    in 2-D).  For a strongly convex objective the result localizes the
    minimizer well below ``resolution``; for merely Lipschitz objectives
    the lattice guarantee (within one cell of a true minimizer) applies.
    """
    if resolution <= 0:
        raise InvalidParameterError("resolution must be positive")
    if np.isscalar(box[0]):
        lo, hi = float(box[0]), float(box[1])
        if not hi > lo:
            raise InvalidParameterError("empty box")
        n = int(min(_MAX_LATTICE_1D, max(3, round((hi - lo) / resolution) + 1)))
        xs = np.linspace(lo, hi, n)
        vals = np.asarray(fn(xs))
        k = int(np.argmin(vals))
        cell = xs[1] - xs[0]
        a = max(lo, xs[k] - cell)
        b = min(hi, xs[k] + cell)
        x, v = _golden_section(lambda t: float(fn(np.array([t]))[0]), a, b)
        if vals[k] < v:
            return float(xs[k]), float(vals[k])
        return float(x), float(v)

    (l1, h1), (l2, h2) = box
    if not (h1 > l1 and h2 > l2):
        raise InvalidParameterError("empty box")
    n1 = int(min(_MAX_LATTICE_2D, max(3, round((h1 - l1) / resolution) + 1)))
    n2 = int(min(_MAX_LATTICE_2D, max(3, round((h2 - l2) / resolution) + 1)))
    xs = np.linspace(l1, h1, n1)
    ys = np.linspace(l2, h2, n2)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = np.asarray(fn(X, Y))
    k = int(np.argmin(vals))
    i, j = np.unravel_index(k, vals.shape)
    p = np.array([xs[i], ys[j]])
    best = float(vals[i, j])
    width = 2.0 * max(xs[1] - xs[0], ys[1] - ys[0])
    dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]),
            np.array([1.0, 1.0]) / math.sqrt(2.0),
            np.array([1.0, -1.0]) / math.sqrt(2.0)]
    span = max(h1 - l1, h2 - l2)
    for _ in range(32):
        for d in dirs:
            def line(t, p=p, d=d):
                q = p + t * d
                return float(fn(np.array([[q[0]]]), np.array([[q[1]]]))[0, 0])
            t, v = _golden_section(line, -width, width, iters=48)
            if v < best:
                p = p + t * d
                best = v
        width *= 0.5
        if width < 1e-9 * span:
            break
    return p, best


def generic_prox_subproblem(model, reg, base, beta, tol):
    """Certified solve of  argmin_y { f_base(y,xi) + r(y) + (beta/2)||y-base||^2 }.

    ``model`` is a :class:`~modelprox.models.SampledModel`; requires
    beta > eta so the subproblem is strongly convex.  The certificate is
    the primal-dual gap of the interval-dual reformulation; a failed
    certification raises :class:`ToleranceNotMetError`.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be positive")
    base = np.asarray(base, dtype=float)
    lin, const, pieces = model.pieces()
    spec = SubproblemSpec(
        dim=base.shape[0],
        h_iso=beta,
        lin=lin - beta * base,
        const=const + 0.5 * beta * float(base @ base),
        pieces=pieces,
        reg=reg,
        reg_dim=model.reg_dim,
    )
    return solve_certified(spec, tol)


def finite_difference_check(fn, x, v, h):
    """Max coordinate residual of central differences against v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    worst = 0.0
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = h
        est = (fn(x + e) - fn(x - e)) / (2.0 * h)
        worst = max(worst, abs(est - v[k]))
    return worst


# ---------------------------------------------------------------------------
# pairing registry


@dataclass
class Pairing:
    """One (closed form, oracle) pair executed by the verify command."""

    name: str
    run: callable          # rng, n -> (max_abs_error, worst_instance)
    tolerance: float
    instances: int


@dataclass
class OracleReport:
    op_name: str
    instances_checked: int
    max_abs_error: float
    worst_instance: str
    passed: bool
    tolerance: float


def _phase_1d(rng):
    a = rng.standard_normal(1)
    while abs(a[0]) < 0.1:
        a = rng.standard_normal(1)
    b = float(rng.uniform_open(1)[0] * 4.0)
    x = 2.0 * rng.standard_normal(1)
    prob = pb.phase_instance(a.reshape(1, 1), [b])
    return prob, x


def _phase_grid_box(prob, x, beta):
    lam = 1.0 / beta
    f0 = pb.datum_value(prob, 0, x)
    radius = math.sqrt(2.0 * lam * f0) + 1e-3
    return (float(x[0] - radius), float(x[0] + radius))


def _blind_1d(rng):
    u = rng.standard_normal(1)
    v = rng.standard_normal(1)
    while abs(u[0]) < 0.1:
        u = rng.standard_normal(1)
    while abs(v[0]) < 0.1:
        v = rng.standard_normal(1)
    b = float(rng.standard_normal(1)[0])
    xy = 2.0 * rng.standard_normal(2)
    prob = pb.blind_instance(u.reshape(1, 1), v.reshape(1, 1), [b])
    return prob, xy


def _blind_grid_box(prob, xy, beta):
    lam = 1.0 / beta
    f0 = pb.datum_value(prob, 0, xy)
    radius = math.sqrt(2.0 * lam * f0) + 1e-3
    return ((float(xy[0] - radius), float(xy[0] + radius)),
            (float(xy[1] - radius), float(xy[1] + radius)))


def _value_error_clip(rng, n, step_fn=pb.solve_linear_model_prox):
    worst, worst_desc = 0.0, ""
    for _ in range(n):
        gamma = float(4.0 * (rng.uniform_open(1)[0] - 0.5))
        zeta = rng.standard_normal(2)
        delta = step_fn(gamma, zeta)
        val = abs(gamma + float(zeta @ delta)) + 0.5 * float(delta @ delta)

        def fn(X, Y):
            return np.abs(gamma + zeta[0] * X + zeta[1] * Y) + 0.5 * (X * X + Y * Y)

        r = float(np.linalg.norm(zeta)) + 1e-3
        _, oval = grid_minimize(fn, ((-r, r), (-r, r)), 1e-4)
        err = val - oval
        if err > worst:
            worst, worst_desc = err, f"gamma={gamma!r} zeta={zeta.tolist()!r}"
    return worst, worst_desc


def phase_model_grid_fn(family, prob, x, beta):
    """Vectorized model-step subproblem value on 1-d phase instances."""
    a, b, x0 = float(prob.A[0, 0]), float(prob.b[0]), float(x[0])
    t = a * x0
    if family is ModelFamily.PROX_POINT:
        def fn(ys):
            return np.abs((a * ys) ** 2 - b) + 0.5 * beta * (ys - x0) ** 2
    else:
        def fn(ys):
            return (np.abs(t * t + 2.0 * t * a * (ys - x0) - b)
                    + 0.5 * beta * (ys - x0) ** 2)
    return fn


def blind_model_grid_fn(family, prob, xy, beta):
    """Vectorized model-step subproblem value on 1+1-d blind instances."""
    u, v, b = float(prob.U[0, 0]), float(prob.V[0, 0]), float(prob.b[0])
    x0, y0 = float(xy[0]), float(xy[1])
    du, dv = u * x0, v * y0
    if family is ModelFamily.PROX_POINT:
        def fn(X, Y):
            return (np.abs(u * X * v * Y - b)
                    + 0.5 * beta * ((X - x0) ** 2 + (Y - y0) ** 2))
    else:
        def fn(X, Y):
            lin = du * dv + dv * u * (X - x0) + du * v * (Y - y0)
            return np.abs(lin - b) + 0.5 * beta * ((X - x0) ** 2 + (Y - y0) ** 2)
    return fn


def _step_vs_grid_phase(rng, n, family, step_fn):
    worst, worst_desc = 0.0, ""
    for _ in range(n):
        prob, x = _phase_1d(rng)
        beta = 0.2 + 5.0 * rng.uniform_open(1)[0]
        y = step_fn(prob, x, 0, beta)
        model = SampledModel(family, prob, 0, x)
        val = model.value(y) + 0.5 * beta * float((y - x) @ (y - x))
        fn = phase_model_grid_fn(family, prob, x, beta)
        lo, hi = _phase_grid_box(prob, x, beta)
        _, oval = grid_minimize(fn, (lo, hi), 1e-5)
        err = val - oval
        if err > worst:
            worst, worst_desc = err, f"a={prob.A[0,0]!r} b={prob.b[0]!r} x={x[0]!r} beta={beta!r}"
    return worst, worst_desc


def _step_vs_grid_blind(rng, n, family, step_fn):
    worst, worst_desc = 0.0, ""
    for _ in range(n):
        prob, xy = _blind_1d(rng)
        beta = 0.2 + 5.0 * rng.uniform_open(1)[0]
        out = step_fn(prob, xy, 0, beta)
        model = SampledModel(family, prob, 0, xy)
        val = model.value(out) + 0.5 * beta * float((out - xy) @ (out - xy))
        fn = blind_model_grid_fn(family, prob, xy, beta)
        _, oval = grid_minimize(fn, _blind_grid_box(prob, xy, beta), 1e-4)
        err = val - oval
        if err > worst:
            worst, worst_desc = err, (f"u={prob.U[0,0]!r} v={prob.V[0,0]!r} "
                                      f"b={prob.b[0]!r} xy={xy.tolist()!r} beta={beta!r}")
    return worst, worst_desc


def _step_vs_generic(rng, n, make_instance, family, step_fn, dims):
    worst, worst_desc = 0.0, ""
    r0 = zero_reg()
    for _ in range(n):
        prob, x = make_instance(rng, dims)
        eta = family_eta(prob, family)
        beta = eta + 0.5 + 5.0 * rng.uniform_open(1)[0]
        y = step_fn(prob, x, 0, beta)
        model = SampledModel(family, prob, 0, x)
        val = model.value(y) + 0.5 * beta * float((y - x) @ (y - x))
        res = generic_prox_subproblem(model, r0, x, beta, tol=1e-10)
        err = val - res.lower_bound
        if err > worst:
            worst, worst_desc = err, f"kind={prob.kind} x={x.tolist()!r} beta={beta!r}"
    return worst, worst_desc


def _make_phase(rng, d):
    A = rng.standard_normal(d).reshape(1, d)
    b = [float(rng.uniform_open(1)[0] * 4.0)]
    return pb.phase_instance(A, b), rng.standard_normal(d)


def _make_blind(rng, dims):
    d1, d2 = dims
    U = rng.standard_normal(d1).reshape(1, d1)
    V = rng.standard_normal(d2).reshape(1, d2)
    b = [float(rng.standard_normal(1)[0])]
    return pb.blind_instance(U, V, b), rng.standard_normal(d1 + d2)


def _lad_vs_grid(rng, n):
    worst, worst_desc = 0.0, ""
    for _ in range(n):
        a = rng.standard_normal(1)
        while abs(a[0]) < 0.1:
            a = rng.standard_normal(1)
        b = float(rng.standard_normal(1)[0])
        x = 2.0 * rng.standard_normal(1)
        prob = pb.lad_instance(a.reshape(1, 1), [b])
        beta = 0.2 + 5.0 * rng.uniform_open(1)[0]
        y = pb.lad_model_step(prob, x, 0, beta)
        val = abs(a[0] * y[0] - b) + 0.5 * beta * (y[0] - x[0]) ** 2

        def fn(ys):
            return np.abs(a[0] * ys - b) + 0.5 * beta * (ys - x[0]) ** 2

        f0 = abs(a[0] * x[0] - b)
        radius = math.sqrt(2.0 * f0 / beta) + 1e-3
        _, oval = grid_minimize(fn, (float(x[0] - radius), float(x[0] + radius)), 1e-5)
        err = val - oval
        if err > worst:
            worst, worst_desc = err, f"a={a[0]!r} b={b!r} x={x[0]!r} beta={beta!r}"
    return worst, worst_desc


def _cvar_vs_generic(rng, n, step_fn=pb.cvar_model_step):
    worst, worst_desc = 0.0, ""
    r0 = zero_reg()
    for _ in range(n):
        d = 2
        A = rng.standard_normal(d).reshape(1, d)
        b = [float(rng.standard_normal(1)[0])]
        alpha = 0.1 + 0.8 * rng.uniform_open(1)[0]
        prob = pb.cvar_instance(A, b, alpha)
        xg = rng.standard_normal(d + 1)
        beta = 0.2 + 5.0 * rng.uniform_open(1)[0]
        y, g = step_fn(prob, xg, 0, beta, r0)
        out = np.concatenate([y, [g]])
        model = SampledModel(ModelFamily.PROX_LINEAR, prob, 0, xg)
        val = model.value(out) + 0.5 * beta * float((out - xg) @ (out - xg))
        res = generic_prox_subproblem(model, r0, xg, beta, tol=1e-10)
        err = max(val - res.lower_bound, float(np.linalg.norm(out - res.y)))
        if err > worst:
            worst, worst_desc = err, f"alpha={alpha!r} xg={xg.tolist()!r} beta={beta!r}"
    return worst, worst_desc


def default_pairings(instances=60):
    """The registered oracle pairings, one per closed-form step op."""
    n = instances
    return [
        Pairing("solve_linear_model_prox/grid2d",
                lambda rng, n=n: _value_error_clip(rng, n), 1e-6, n),
        Pairing("proxlinear_step_phase/grid1d",
                lambda rng, n=n: _step_vs_grid_phase(
                    rng, n, ModelFamily.PROX_LINEAR, pb.proxlinear_step_phase),
                1e-6, n),
        Pairing("proxlinear_step_phase/generic",
                lambda rng, n=n: _step_vs_generic(
                    rng, n, lambda r, d: _make_phase(r, d),
                    ModelFamily.PROX_LINEAR, pb.proxlinear_step_phase, 3),
                1e-6, n),
        Pairing("proxlinear_step_blind/grid2d",
                lambda rng, n=n: _step_vs_grid_blind(
                    rng, n, ModelFamily.PROX_LINEAR, pb.proxlinear_step_blind),
                1e-6, n),
        Pairing("proxlinear_step_blind/generic",
                lambda rng, n=n: _step_vs_generic(
                    rng, n, _make_blind, ModelFamily.PROX_LINEAR,
                    pb.proxlinear_step_blind, (2, 2)),
                1e-6, n),
        Pairing("proxpoint_step_phase/grid1d",
                lambda rng, n=n: _step_vs_grid_phase(
                    rng, n, ModelFamily.PROX_POINT, pb.proxpoint_step_phase),
                1e-6, n),
        Pairing("proxpoint_step_phase/generic",
                lambda rng, n=n: _step_vs_generic(
                    rng, n, lambda r, d: _make_phase(r, d),
                    ModelFamily.PROX_POINT, pb.proxpoint_step_phase, 3),
                1e-6, n),
        Pairing("proxpoint_step_blind/grid2d",
                lambda rng, n=n: _step_vs_grid_blind(
                    rng, n, ModelFamily.PROX_POINT, pb.proxpoint_step_blind),
                1e-6, n),
        Pairing("proxpoint_step_blind/generic",
                lambda rng, n=n: _step_vs_generic(
                    rng, n, _make_blind, ModelFamily.PROX_POINT,
                    pb.proxpoint_step_blind, (2, 2)),
                1e-6, n),
        Pairing("lad_model_step/grid1d",
                lambda rng, n=n: _lad_vs_grid(rng, n), 1e-6, n),
        Pairing("cvar_model_step/generic",
                lambda rng, n=n: _cvar_vs_generic(rng, n), 1e-6, n),
    ]


def faulted_pairings(name, magnitude=1e-3, instances=30):
    """The default registry with the named op's closed form perturbed.

    Fault-injection fixture for the verification gate: the returned
    registry must fail on (at least) the named pairing.
    """
    pairings = default_pairings(instances)
    for k, p in enumerate(pairings):
        if p.name != name:
            continue
        if name == "solve_linear_model_prox/grid2d":
            def bad(gamma, zeta, mag=magnitude):
                return pb.solve_linear_model_prox(gamma, zeta) + mag
            pairings[k] = Pairing(p.name,
                                  lambda rng, n=instances: _value_error_clip(rng, n, bad),
                                  p.tolerance, instances)
        elif name == "cvar_model_step/generic":
            def badc(prob, xg, i, beta, reg, mag=magnitude):
                y, g = pb.cvar_model_step(prob, xg, i, beta, reg)
                return y + mag, g
            pairings[k] = Pairing(p.name,
                                  lambda rng, n=instances: _cvar_vs_generic(rng, n, badc),
                                  p.tolerance, instances)
        else:
            base_run = p.run

            def shifted(rng, base_run=base_run, mag=magnitude):
                err, desc = base_run(rng)
                return err + mag, desc
            pairings[k] = Pairing(p.name, shifted, p.tolerance, instances)
    return pairings


def run_verification(pairings=None, seed=20240501):
    """Execute a pairing registry; one report per pairing."""
    if pairings is None:
        pairings = default_pairings()
    reports = []
    for k, p in enumerate(pairings):
        rng = RngStream(seed, stream_id=1000 + k)
        err, worst = p.run(rng)
        reports.append(OracleReport(p.name, p.instances, float(err), worst,
                                    bool(err <= p.tolerance), p.tolerance))
    return reports
