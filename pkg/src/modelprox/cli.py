"""Benchmark command line: generate / sweep / trace / verify.

Exit codes: 0 success, 1 validation error, 2 verification failure,
3 runtime failure.
"""

import argparse
import json
import sys

from .errors import ConfigValidationError, InvalidParameterError
from .harness import (PRESETS, SweepConfig, load_config, make_preset_problem,
                      run_envelope_trace, run_sweep, save_config, verify_all)
from .problems import problem_to_config
from .rng import RngStream

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFY = 2
EXIT_RUNTIME = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="modelprox",
        description="Stochastic model-based minimization benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate and serialize a problem instance")
    gen.add_argument("--preset", choices=sorted(PRESETS), default="phase-10-30")
    gen.add_argument("--seed", type=int, default=12345)
    gen.add_argument("--out", default="instance.json")

    swp = sub.add_parser("sweep", help="run a step-size sweep and write the CSV")
    swp.add_argument("--config", help="JSON config file (empty file = defaults)")
    swp.add_argument("--preset", choices=sorted(PRESETS))
    swp.add_argument("--seed", type=int)
    swp.add_argument("--out")
    swp.add_argument("--rounds", type=int)
    swp.add_argument("--epochs", type=int)
    swp.add_argument("--timing", help="side file for measured per-cell wall times")

    trc = sub.add_parser("trace", help="envelope stationarity along one run")
    trc.add_argument("--preset", choices=sorted(PRESETS), default="phase-10-30")
    trc.add_argument("--method", choices=["sgd", "prox-linear", "prox-point"],
                     default="prox-linear")
    trc.add_argument("--stepsize", type=float, default=0.1)
    trc.add_argument("--epochs", type=int, default=100)
    trc.add_argument("--checkpoints", default="0,1,2,5,10,20,50,100",
                     help="comma-separated epoch list")
    trc.add_argument("--seed", type=int, default=12345)
    trc.add_argument("--out", default="trace.csv")

    ver = sub.add_parser("verify", help="run every registered oracle pairing")
    ver.add_argument("--instances", type=int, default=60,
                     help="instances per pairing")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            rng = RngStream(args.seed, 1 << 48)
            problem = make_preset_problem(args.preset, rng)
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(problem_to_config(problem), fh)
                fh.write("\n")
            print(f"wrote {args.out}")
            return EXIT_OK

        if args.command == "sweep":
            from dataclasses import replace
            cfg = load_config(args.config) if args.config else SweepConfig()
            if args.preset:
                cfg = replace(cfg, problem=dict(PRESETS[args.preset]))
            if args.seed is not None:
                cfg = replace(cfg, master_seed=args.seed)
            if args.out:
                cfg = replace(cfg, output=args.out)
            if args.rounds:
                cfg = replace(cfg, rounds=args.rounds)
            if args.epochs:
                cfg = replace(cfg, epochs=args.epochs)
            cells, summary = run_sweep(cfg, timing_path=args.timing)
            print(f"wrote {cfg.output}: {len(cells)} cells, "
                  f"{len(summary)} summary rows")
            return EXIT_OK

        if args.command == "trace":
            checkpoints = [int(tok) for tok in args.checkpoints.split(",") if tok]
            rows = run_envelope_trace(args.preset, args.method, args.stepsize,
                                      args.epochs, checkpoints, args.seed,
                                      out=args.out)
            for epoch, lam, val, grad, gap in rows:
                print(f"epoch {epoch:5d}  phi_lam {val:12.6e}  "
                      f"|grad phi_lam| {grad:12.6e}  certified {gap:.1e}")
            print(f"wrote {args.out}")
            return EXIT_OK

        if args.command == "verify":
            from .oracle import default_pairings
            reports, ok = verify_all(default_pairings(args.instances))
            for r in reports:
                status = "PASS" if r.passed else "FAIL"
                print(f"{status} {r.op_name:40s} n={r.instances_checked} "
                      f"max_err={r.max_abs_error:.3e} tol={r.tolerance:.0e}")
            print("verification " + ("passed" if ok else "FAILED"))
            return EXIT_OK if ok else EXIT_VERIFY
    except (ConfigValidationError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - runtime failures
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
