"""Command-line interface: ``permlc {gen,exact,estimate,verify,bench}``.

Exit codes: 0 ok, 2 bad input, 3 spectrum violation, 4 dimension guard,
5 sampler divergence, 6 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import jsonio
from .density import build_density
from .errors import (
    ChainDiverged,
    DimensionTooLarge,
    EigenConvergenceError,
    NonFiniteWeight,
    NotHermitianError,
    SpectrumOutOfRange,
)
from .estimators import SamplerConfig, estimate_anneal, estimate_direct
from .hermitian import random_instance
from .permanent import RYSER_MAX_N, permanent_definition, permanent_ryser
from .verify import CROSSCHECK_MAX_N, summarize, verify_matrix

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SPECTRUM = 3
EXIT_DIMENSION = 4
EXIT_DIVERGED = 5
EXIT_VERIFY_FAILED = 6

BENCH_HEADER = ["n", "trial", "exact", "direct_est", "direct_se", "anneal_est", "anneal_se", "ess", "seconds"]
SEED_ENV = "PERMLC_SEED"


class CommandFailed(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise CommandFailed(EXIT_BAD_INPUT, f"{SEED_ENV}={env!r} is not an integer")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_manifest(args, config: dict, seed: int) -> None:
    if not getattr(args, "manifest", None):
        return
    canonical = json.dumps(config, sort_keys=True, default=str)
    manifest = {
        "command": args.command,
        "configHash": hashlib.sha256(canonical.encode()).hexdigest(),
        "seed": seed,
        "inputPath": str(getattr(args, "matrix", None) or ""),
        "outputPath": str(getattr(args, "out", None) or ""),
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    with open(args.manifest, "w") as fh:
        fh.write(jsonio.dumps(manifest) + "\n")


def _read(path):
    try:
        return jsonio.read_matrix(path)
    except OSError as exc:
        raise CommandFailed(EXIT_BAD_INPUT, f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CommandFailed(EXIT_BAD_INPUT, f"{path} is not valid JSON: {exc}")


def _sampler_config(args, seed: int, steps: int | None = None) -> SamplerConfig:
    schedule = None
    if args.schedule:
        schedule = tuple(float(b) for b in args.schedule.split(","))
    return SamplerConfig(
        seed=seed,
        chains=args.chains,
        steps_per_phase=steps if steps is not None else args.steps,
        burn_in=args.burn_in,
        anneal_schedule=schedule,
        step_size=args.step_size,
        proposal=args.proposal,
        threads=_threads(args),
    )


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return max(1, min(os.cpu_count() or 1, args.chains))


def cmd_gen(args) -> int:
    seed = resolve_seed(args.seed)
    if args.n < 1:
        raise CommandFailed(EXIT_BAD_INPUT, "--n must be >= 1")
    if not 0.0 <= args.spread <= 1.0:
        raise CommandFailed(EXIT_BAD_INPUT, "--spread must lie in [0, 1]")
    A = random_instance(args.n, args.spread, seed)
    _emit(jsonio.dumps(jsonio.matrix_to_dict(A)) + "\n", args.out)
    _write_manifest(args, {"n": args.n, "spread": args.spread, "seed": seed}, seed)
    return EXIT_OK


def cmd_exact(args) -> int:
    A = _read(args.matrix)
    n = A.shape[0]
    if n > RYSER_MAX_N:
        raise DimensionTooLarge(n, RYSER_MAX_N, "exact")
    per = permanent_ryser(A)
    result = {"n": n, "permanent": per.real, "imag": per.imag}
    if n <= CROSSCHECK_MAX_N:
        ref = permanent_definition(A)
        rel = abs(ref - per) / max(abs(per), 1e-300)
        result["definitionRelativeDifference"] = rel
        if rel > 1e-10:
            _emit(jsonio.dumps(result) + "\n", args.out)
            raise CommandFailed(EXIT_VERIFY_FAILED, "Ryser and definition permanents disagree")
    _emit(jsonio.dumps(result) + "\n", args.out)
    _write_manifest(args, {"matrix": args.matrix}, 0)
    return EXIT_OK


def cmd_estimate(args) -> int:
    seed = resolve_seed(args.seed)
    A = _read(args.matrix)
    D = build_density(A)
    cfg = _sampler_config(args, seed)
    estimator = estimate_direct if args.method == "direct" else estimate_anneal
    report = estimator(D, cfg)
    _emit(report.to_json(timing=args.timing) + "\n", args.out)
    _write_manifest(args, {"method": args.method, **cfg.__dict__}, seed)
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed)
    if args.random is not None:
        n, count, base = args.random
        instances = [(f"random(n={n}, seed={base + i})", random_instance(n, 1.0, base + i)) for i in range(count)]
    elif args.matrix:
        instances = [(str(args.matrix), _read(args.matrix))]
    else:
        raise CommandFailed(EXIT_BAD_INPUT, "verify needs a matrix path or --random N COUNT SEED")

    reports = []
    for label, A in instances:
        results = verify_matrix(A, seed=seed, trials=args.trials, wick_samples=args.wick_samples)
        reports.append(summarize(label, A.shape[0], results))
    ok = all(r["pass"] for r in reports)
    _emit(jsonio.dumps({"pass": ok, "instances": reports}) + "\n", args.out)
    _write_manifest(args, {"matrix": args.matrix, "random": args.random, "trials": args.trials}, seed)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def _fmt(x) -> str:
    return "" if x is None else jsonio.format_float(x)


def cmd_bench(args) -> int:
    seed = resolve_seed(args.seed)
    try:
        n_list = [int(v) for v in args.n_list.split(",") if v.strip()]
    except ValueError:
        raise CommandFailed(EXIT_BAD_INPUT, f"--n-list must be comma-separated integers, got {args.n_list!r}")
    fixed = _read(args.matrix) if args.matrix else None
    if fixed is not None:
        n_list = [fixed.shape[0]]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for n in n_list:
        for trial in range(args.trials):
            trial_seed = seed + 1000 * n + trial
            row = {"n": n, "trial": trial}
            start = time.perf_counter()
            try:
                A = fixed if fixed is not None else random_instance(n, args.spread, trial_seed)
                row["exact"] = _fmt(permanent_ryser(A).real) if n <= RYSER_MAX_N else ""
                D = build_density(A)
            except Exception as exc:  # noqa: BLE001 - recorded in the row, run continues
                row.update({k: f"ERROR:{type(exc).__name__}" for k in BENCH_HEADER[2:8] if k not in row})
                row["seconds"] = ""
                writer.writerow([row[k] for k in BENCH_HEADER])
                continue
            cfg = _sampler_config(args, trial_seed, steps=args.budget)
            for key, fn in (("direct", estimate_direct), ("anneal", estimate_anneal)):
                try:
                    rep = fn(D, cfg)
                    row[f"{key}_est"] = _fmt(rep.estimate)
                    row[f"{key}_se"] = _fmt(rep.std_error)
                    if key == "anneal":
                        row["ess"] = _fmt(rep.effective_sample_size)
                except Exception as exc:  # noqa: BLE001
                    row[f"{key}_est"] = row[f"{key}_se"] = f"ERROR:{type(exc).__name__}"
                    if key == "anneal":
                        row["ess"] = ""
            row["seconds"] = _fmt(time.perf_counter() - start) if args.timing else ""
            writer.writerow([row[k] for k in BENCH_HEADER])
    _emit(buf.getvalue(), args.out)
    _write_manifest(args, {"n_list": n_list, "trials": args.trials, "budget": args.budget}, seed)
    return EXIT_OK


def _add_sampler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--steps", type=int, default=5000, help="samples per phase and chain")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--proposal", choices=["langevin", "randomWalk"], default="langevin")
    p.add_argument("--schedule", default=None, help="comma-separated betas from 0 to 1")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="include wall-clock times in the output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permlc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random admissible matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exact", help="exact permanent by Ryser's formula")
    p.add_argument("matrix")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("estimate", help="Monte Carlo estimate of the permanent")
    p.add_argument("matrix")
    p.add_argument("--method", choices=["direct", "anneal"], default="anneal")
    _add_sampler_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("matrix", nargs="?")
    p.add_argument("--random", nargs=3, type=int, metavar=("N", "COUNT", "SEED"))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--wick-samples", type=int, default=100_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="CSV sweep of exact and estimated permanents")
    p.add_argument("--n-list", default="2,4,6")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--budget", type=int, default=5000, help="samples per phase and chain")
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--matrix", default=None, help="benchmark this matrix instead of random ones")
    _add_sampler_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    for p in sub.choices.values():
        p.add_argument("--manifest", default=None, help="write a run manifest JSON here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandFailed as exc:
        print(f"permlc: {exc}", file=sys.stderr)
        return exc.code
    except SpectrumOutOfRange as exc:
        print(f"permlc: SpectrumOutOfRange: {exc}", file=sys.stderr)
        return EXIT_SPECTRUM
    except DimensionTooLarge as exc:
        print(f"permlc: DimensionTooLarge: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (ChainDiverged, NonFiniteWeight) as exc:
        print(f"permlc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (NotHermitianError, EigenConvergenceError, ValueError, OSError) as exc:
        print(f"permlc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
