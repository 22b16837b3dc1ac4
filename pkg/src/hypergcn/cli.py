"""Command-line entry point for batch experiments.

Results are emitted as JSON lines on stdout (config echo first), logs go
to stderr. Exit codes: 0 success, 1 usage error, 2 data error. Identical
argv plus seed reproduce identical output bytes apart from timing fields.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import densek as dk
from .dataio import (
    DataError,
    balanced_split_labels,
    gen_noisy_ssl,
    load_bundle,
    save_bundle,
)
from .hypergraph import Hypergraph, size_counts, validate
from .nn import rng_streams
from .training import METHODS, TrainConfig, run_trials, train_ssl

TIMING_FIELDS = ("seconds_per_epoch",)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Parser whose usage failures exit with code 1 instead of 2."""

    def error(self, message):
        raise _UsageError(message)


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _log(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _config_from(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        method=getattr(args, "method", "hypergcn"),
        hidden=args.hidden,
        dropout=args.dropout,
        lr=args.lr,
        weight_decay=args.weight_decay,
        epochs=args.epochs,
        hlr_lambda=args.hlr_lambda,
        seed=args.seed,
    )


def _echo_config(command: str, args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    _emit({"command": command, "config": resolved})


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=0.0005)
    p.add_argument("--hlr-lambda", type=float, default=0.001)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HYPERGCN_THREADS", "1")))
    except ValueError:
        return 1


def cmd_validate(args) -> int:
    bundle = load_bundle(args.data)
    problems = validate(bundle.hypergraph)
    _emit({
        "valid": not problems,
        "violations": problems,
        "n": bundle.hypergraph.n,
        "m": bundle.hypergraph.m,
        "classes": bundle.num_classes,
    })
    return 0


def cmd_counts(args) -> int:
    bundle = load_bundle(args.data)
    n_inc, n_med, n_clq = size_counts(bundle.hypergraph)
    _emit({"N": n_inc, "N_m": n_med, "N_c": n_clq, "m": bundle.hypergraph.m})
    return 0


def cmd_train(args) -> int:
    bundle = load_bundle(args.data)
    cfg = _config_from(args)
    streams = rng_streams(cfg.seed)
    split = balanced_split_labels(bundle.labels, args.budget, streams.split)
    report = train_ssl(bundle.hypergraph, bundle.features, split, cfg)
    _emit(report.to_dict())
    return 0


def cmd_trials(args) -> int:
    bundle = load_bundle(args.data)
    cfg = _config_from(args)
    result = run_trials(
        bundle.hypergraph,
        bundle.features,
        bundle.labels,
        cfg,
        trials=args.trials,
        budget=args.budget,
        workers=_workers(),
    )
    for t, report in enumerate(result.reports):
        row = report.to_dict()
        row["trial"] = t
        row.pop("losses")  # per-trial traces stay out of the aggregate stream
        _emit(row)
    aggregate = {
        "method": cfg.method,
        "dataset": bundle.name,
        "budget": args.budget,
        "trials": args.trials,
        "mean_error": result.mean_error,
        "std_error": result.std_error,
    }
    _emit({"aggregate": aggregate})
    if args.out:
        sec = float(np.mean([r.seconds_per_epoch for r in result.reports]))
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["method", "dataset", "budget", "mean", "stdev", "epochs", "seconds_per_epoch"]
            )
            writer.writerow(
                [cfg.method, bundle.name, args.budget, f"{result.mean_error:.4f}",
                 f"{result.std_error:.4f}", cfg.epochs, f"{sec:.6f}"]
            )
        _log(f"wrote {args.out}")
    return 0


def cmd_densek(args) -> int:
    bundle = load_bundle(args.data)
    h = bundle.hypergraph
    k = max(1, int(round(args.k_frac * h.n)))
    inst = dk.DenseKInstance(hypergraph=h, k=k)
    method = args.method
    if method == "max-degree":
        chosen = dk.max_degree(inst)
    elif method == "remove-min-degree":
        chosen = dk.remove_min_degree(inst)
    elif method == "brute-force":
        chosen, _ = dk.brute_force(inst)
    elif method in ("hypergcn", "fast-hypergcn"):
        # train on freshly generated planted instances, then decode
        rng = np.random.default_rng(args.seed)
        sizes = rng.integers(100, 301, size=args.trials)
        samples = [
            dk.gen_sample(int(sz), (3 * int(sz)) // 4, 0.75, rng) for sz in sizes
        ]
        cfg = replace(_config_from(args), method=method)
        model = dk.train_densek(samples, cfg, maps=args.maps)
        chosen = dk.solve_learned(model, inst, seed=args.seed)
    else:
        raise _UsageError(f"unknown densek method {method!r}")
    _emit({
        "method": method,
        "k": k,
        "density": dk.density(h, chosen),
        "vertex_set": chosen,
    })
    return 0


def cmd_gen_noisy(args) -> int:
    rng = np.random.default_rng(args.seed)
    bundle = gen_noisy_ssl(eta=args.eta, rng=rng)
    save_bundle(bundle, args.out)
    _emit({"written": args.out, "n": bundle.hypergraph.n, "m": bundle.hypergraph.m,
           "eta": args.eta})
    return 0


def cmd_gen_densek(args) -> int:
    rng = np.random.default_rng(args.seed)
    n = args.vertices
    k = max(1, int(round(args.k_frac * n)))
    h, target = dk.gen_sample(n, k, args.p, rng)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "hyperedges.txt"), "w") as fh:
        for e in h.edges:
            fh.write(" ".join(str(v) for v in e) + "\n")
    with open(os.path.join(args.out, "labels.txt"), "w") as fh:
        for y in target:
            fh.write(f"{int(y)}\n")
    np.savetxt(os.path.join(args.out, "features.csv"),
               dk.vertex_features(h), fmt="%.17g", delimiter=",")
    _emit({"written": args.out, "n": n, "k": k, "density_of_target":
           dk.density(h, np.flatnonzero(target))})
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="hypergcn", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="check a dataset directory")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("counts", help="hyperedge size statistics N, N_m, N_c")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("train", help="single train/eval run")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("trials", help="repeated splits, mean and stdev error")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="aggregate CSV path")
    _add_train_flags(p)
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("densek", help="densest-k-subhypergraph solvers")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True,
                   choices=("max-degree", "remove-min-degree", "brute-force",
                            "hypergcn", "fast-hypergcn"))
    p.add_argument("--k-frac", type=float, default=0.75)
    p.add_argument("--maps", type=int, default=8)
    p.add_argument("--trials", type=int, default=100,
                   help="training samples for the learned methods")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_densek)

    p = sub.add_parser("gen-noisy", help="generate a noisy two-class benchmark")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_noisy)

    p = sub.add_parser("gen-densek", help="generate a planted dense instance")
    p.add_argument("--vertices", type=int, default=1000)
    p.add_argument("--k-frac", type=float, default=0.75)
    p.add_argument("--p", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_densek)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _echo_config(args.subcommand, args)
        return args.func(args)
    except _UsageError as exc:
        _log(f"usage error: {exc}")
        parser.print_usage(sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        _log(f"data error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
