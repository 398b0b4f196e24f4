"""Command-line entry point.

Any of --gen, --n, --d, --seed, --strategy, --partitions, --reps, --cores and
--cap accepts a comma-separated list; the run then sweeps the full cross
product, writing one report per combination.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import metrics
from .harness import ExperimentConfig, ExperimentError, expand_sweep, run_sweep


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def _caps(text: str) -> list[int | None]:
    return [None if x.strip().lower() in ("none", "exact") else int(x) for x in text.split(",")]


def _words(text: str) -> list[str]:
    return [x.strip().lower() for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="skygres",
        description="Skyline and grid-resistance benchmarks over partitioned parallel computation.",
    )
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--dataset", help="CSV dataset (header line, numeric non-negative columns)")
    src.add_argument("--gen", type=_words, help="synthetic distribution(s): uni, ant (default: ant)")
    ap.add_argument("--n", type=_ints, default=[1_000_000], help="tuples to generate (default 1000000)")
    ap.add_argument("--d", type=_ints, default=[3], help="dimensions to generate (default 3)")
    ap.add_argument("--seed", type=_ints, default=[0], help="base seed; instance i uses seed+i")
    ap.add_argument("--strategy", type=_words, default=["none"], help="none, grid, angular, sliced")
    ap.add_argument("--partitions", type=_ints, default=[16], help="target partition count (default 16)")
    ap.add_argument("--reps", type=_ints, default=[0], help="representatives (default 0)")
    ap.add_argument("--cores", type=_ints, default=[16], help="core budget (default 16)")
    ap.add_argument("--cap", type=_caps, default=[25], help="upper bound on g, or 'none' for exact (default 25)")
    ap.add_argument("--repeat", type=int, default=None, help="instances to average (default 5 generated, 1 CSV)")
    ap.add_argument("--normalize", action="store_true", help="min-max scale each attribute to [0, 1]")
    ap.add_argument("--mode", choices=["skyline", "gres"], default="gres")
    ap.add_argument("--oracle", action="store_true", help="cross-check against brute force (small inputs)")
    ap.add_argument("--timings", action="store_true", help="record wall-clock times (makes output non-reproducible)")
    ap.add_argument("--format", choices=["csv", "jsonl"], default="jsonl")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def configs_from_args(args: argparse.Namespace) -> list[ExperimentConfig]:
    base = ExperimentConfig(
        gen=None if args.dataset else "ant",
        dataset=args.dataset,
        normalize=args.normalize,
        repetitions=args.repeat if args.repeat is not None else (1 if args.dataset else 5),
        mode=args.mode,
        oracle=args.oracle,
        timings=args.timings,
    )
    axes = dict(
        strategy=args.strategy,
        partitions=args.partitions,
        reps=args.reps,
        cores=args.cores,
        cap=args.cap,
    )
    if not args.dataset:
        axes = dict(gen=args.gen or ["ant"], n=args.n, d=args.d, seed=args.seed, **axes)
    configs = expand_sweep(base, **axes)
    for cfg in configs:
        cfg.validate()
    return configs


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        configs = configs_from_args(args)
    except ValueError as exc:
        ap.error(str(exc))
    try:
        reports = run_sweep(configs)
    except ExperimentError as exc:
        print(f"skygres: error: {exc}", file=sys.stderr)
        return 1
    data = metrics.serialize(reports, args.format)
    if args.out:
        try:
            with open(args.out, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            print(f"skygres: error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.buffer.write(data)
    return 0


if __name__ == "__main__":
    sys.exit(main())
