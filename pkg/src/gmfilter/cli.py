"""Command-line entry point: ``sample``, ``match``, ``experiment`` and ``bruteforce``.

Exit codes: 0 on success, 2 for configuration errors, 3 for data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .experiment import (
    PRESETS,
    SCHEMA_VERSION,
    ConfigError,
    ExperimentSpec,
    read_seeds,
    read_truth,
    run_experiment,
    sample_instance,
    write_experiment,
)
from .faq import FaqConfig
from .filter import (
    FilterConfig,
    default_workers,
    front_seeds,
    pair_frequencies,
    run_filter,
    write_pairs_csv,
    write_results_csv,
)
from .graph import Injection, correct_matches, read_edgelist, write_edgelist
from .oracle import CRITERIA, EnumerationBudget, brute_force_gmp
from .padding import pad, parse_scheme

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class DataError(Exception):
    pass


def _model_from_args(args) -> dict:
    model = {"kind": args.model, "n": args.n, "n_c": args.n_c, "rho": args.rho}
    extra = {
        "homogeneous": {"lam": args.lam},
        "planted": {"p": args.p, "q": args.q},
        "rdpg": {"core": args.core},
        "adversarial": {"beta": args.beta, "eps": args.eps},
    }[args.model]
    model.update(extra)
    return model


def cmd_sample(args) -> int:
    if args.config:
        model = json.loads(Path(args.config).read_text()).get("model", {})
    else:
        model = _model_from_args(args)
    ExperimentSpec(model=model, replicates=1)
    if model.get("kind") == "files":
        raise ConfigError("sample needs a synthetic model")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    A, B, truth = sample_instance(model, 0, rng)
    write_edgelist(A, out / "A.edges")
    write_edgelist(B, out / "B.edges")
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "seed": args.seed,
        "truth": truth.map.tolist(),
    }
    (out / "truth.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _to_original(m, a_order, b_order):
    if m.injection is None:
        return m
    orig = np.empty(len(a_order), dtype=np.int64)
    orig[a_order] = b_order[m.injection.map]
    return replace(m, injection=Injection(orig, m.injection.n))


def cmd_match(args) -> int:
    try:
        A = read_edgelist(args.A)
        B = read_edgelist(args.B)
        seeds = read_seeds(args.seeds) if args.seeds else np.zeros((0, 2), dtype=np.int64)
        truth = read_truth(args.truth, B.n) if args.truth else None
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    if A.n > B.n:
        raise DataError(f"template has {A.n} vertices, network only {B.n}")
    if truth is not None and truth.n_c != A.n:
        raise DataError("truth length does not match the template")
    try:
        A2, B2, a_order, b_order = front_seeds(A, B, seeds)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    cfg = FilterConfig(
        M=args.M,
        s=len(seeds),
        scheme1=parse_scheme(args.scheme),
        scheme2=parse_scheme(args.rescheme) if args.rescheme else None,
        rng_seed=args.seed,
        faq=FaqConfig(args.max_iters, args.tol),
        workers=args.workers or default_workers(),
    )
    t0 = time.perf_counter()
    results = run_filter(A2, B2, cfg)
    wall = time.perf_counter() - t0
    results = [_to_original(m, a_order, b_order) for m in results]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(results, out / "results.csv", truth, A, B)
    write_pairs_csv(pair_frequencies(results), out / "pairs.csv")
    best = results[0]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "restarts": args.M,
        "seeds": len(seeds),
        "scheme": args.scheme,
        "rescheme": args.rescheme,
        "best_restart": best.restart,
        "best_objective": best.objective,
        "best_objective2": best.objective2,
        "failed_restarts": sum(m.injection is None for m in results),
        "seconds_per_restart": wall / args.M,
    }
    if truth is not None and best.injection is not None:
        summary["correct_matches"] = correct_matches(best.injection, truth)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        d = json.loads(Path(args.config).read_text())
    elif args.preset:
        d = json.loads(json.dumps(PRESETS[args.preset]))
    else:
        raise ConfigError("experiment needs --config or --preset")
    for key in ("scale", "replicates", "rng_seed", "smoothing"):
        val = getattr(args, key)
        if val is not None:
            d[key] = val
    spec = ExperimentSpec.from_dict(d)
    outdir = args.out or spec.output
    if not outdir:
        raise ConfigError("no output directory: pass --out or set 'output' in the spec")

    def progress(label, k):
        if args.verbose:
            print(f"{label} replicate {k}", file=sys.stderr)

    cells = run_experiment(spec, workers=args.workers or default_workers(), progress=progress)
    write_experiment(spec, cells, outdir)
    return EXIT_OK


def cmd_bruteforce(args) -> int:
    try:
        A = read_edgelist(args.A)
        B = read_edgelist(args.B)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    At, Bt = pad(A, B, parse_scheme(args.scheme))
    mins, best = brute_force_gmp(At, Bt, EnumerationBudget(args.budget), args.criterion)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "scheme": args.scheme,
        "criterion": args.criterion,
        "objective": best,
        "minimizers": [m.map.tolist() for m in mins],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gmfilter", description="Graph-matching matched filters.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw a template/network pair")
    s.add_argument("--config", help="JSON file with a 'model' block")
    s.add_argument("--model", choices=["homogeneous", "planted", "rdpg", "adversarial"], default="homogeneous")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--n-c", dest="n_c", type=int, default=25)
    s.add_argument("--rho", type=float, default=0.9)
    s.add_argument("--lam", type=float, default=0.5)
    s.add_argument("--p", type=float, default=0.25)
    s.add_argument("--q", type=float, default=0.5)
    s.add_argument("--core", choices=["random", "max-angle"], default="random")
    s.add_argument("--beta", type=float, default=0.3)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("match", help="run the matched filter on two edge lists")
    m.add_argument("A", help="template edge list")
    m.add_argument("B", help="network edge list")
    m.add_argument("--seeds", help="file of 'template network' seed pairs")
    m.add_argument("--truth", help="truth.json from the sample command")
    m.add_argument("--scheme", default="centered")
    m.add_argument("--rescheme", help="second-stage scheme for re-matching")
    m.add_argument("-M", "--restarts", dest="M", type=int, default=50)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--max-iters", type=int, default=100)
    m.add_argument("--tol", type=float, default=1e-6)
    m.add_argument("--workers", type=int, help="worker processes (default from GMFILTER_WORKERS)")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_match)

    e = sub.add_parser("experiment", help="run a replicated simulation grid")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--config", help="JSON experiment spec")
    src.add_argument("--preset", choices=sorted(PRESETS))
    e.add_argument("--scale", type=float)
    e.add_argument("--replicates", type=int)
    e.add_argument("--rng-seed", dest="rng_seed", type=int)
    e.add_argument("--smoothing", type=float, help="Gaussian bandwidth on normalised ranks, e.g. 0.02")
    e.add_argument("--workers", type=int)
    e.add_argument("--out")
    e.add_argument("-v", "--verbose", action="store_true")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bruteforce", help="exhaustive search on a small pair")
    b.add_argument("A")
    b.add_argument("B")
    b.add_argument("--scheme", default="centered")
    b.add_argument("--criterion", choices=CRITERIA, default="frobenius")
    b.add_argument("--budget", type=int, default=2_000_000)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bruteforce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
