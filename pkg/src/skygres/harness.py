"""Experiment configuration, execution and parameter sweeps."""

from __future__ import annotations

import itertools
import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Iterable

from .core import Relation, skyline_oracle, skyline_sfs
from .datagen import Distribution, GenSpec, generate
from .dataset import ingest_csv, normalize
from .gres import DEFAULT_CAP, gres_all, gres_oracle_map
from .metrics import IterationRecord, RunReport, aggregate, gres_histogram, iteration_records
from .parallel import parallel_skyline
from .partition import Strategy, make_plan, select_representatives

log = logging.getLogger(__name__)

ORACLE_LIMIT = 2000


class ExperimentError(RuntimeError):
    pass


class OracleMismatch(ExperimentError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # dataset: either a generator distribution or a CSV path
    gen: str | None = "ant"
    dataset: str | None = None
    n: int = 1_000_000
    d: int = 3
    seed: int = 0
    normalize: bool = False
    strategy: str = "none"
    partitions: int = 16
    reps: int = 0
    cores: int = 16
    cap: int | None = DEFAULT_CAP
    repetitions: int = 5
    mode: str = "gres"
    oracle: bool = False
    timings: bool = False

    def validate(self) -> None:
        if (self.gen is None) == (self.dataset is None):
            raise ValueError("exactly one of gen / dataset must be given")
        if self.gen is not None:
            Distribution(self.gen)
        Strategy(self.strategy)
        if self.mode not in ("skyline", "gres"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.partitions < 1:
            raise ValueError("partitions must be >= 1")
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.reps < 0:
            raise ValueError("reps must be >= 0")
        if self.cap is not None and self.cap < 2:
            raise ValueError("cap must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.n < 0 or self.d < 1:
            raise ValueError("need n >= 0 and d >= 1")

    def describe(self) -> str:
        src = f"gen={self.gen} n={self.n} d={self.d} seed={self.seed}" if self.gen else f"dataset={self.dataset}"
        return (
            f"{src} strategy={self.strategy} p={self.partitions} reps={self.reps} "
            f"cores={self.cores} cap={self.cap} mode={self.mode}"
        )


def load(cfg: ExperimentConfig, instance: int = 0) -> Relation:
    if cfg.gen is not None:
        r = generate(GenSpec(cfg.n, cfg.d, Distribution(cfg.gen), cfg.seed + instance))
    else:
        r = ingest_csv(cfg.dataset)
    return normalize(r) if cfg.normalize else r


def _check_skyline(r: Relation, sky: Relation) -> None:
    if sky.value_set() != skyline_oracle(r).value_set():
        raise OracleMismatch("skyline differs from the brute-force oracle")


def run_single(cfg: ExperimentConfig, instance: int = 0) -> RunReport:
    r = load(cfg, instance)
    plan = make_plan(cfg.strategy, cfg.partitions, r.d)
    oracle = cfg.oracle and len(r) <= ORACLE_LIMIT
    if cfg.oracle and not oracle:
        log.warning("skipping oracle cross-check: %d tuples exceed the limit of %d", len(r), ORACLE_LIMIT)

    report = RunReport(
        dataset=cfg.gen if cfg.gen is not None else os.fspath(cfg.dataset),
        n=len(r),
        d=r.d,
        mode=cfg.mode,
        strategy=plan.strategy.value,
        partitions=plan.p,
        reps_requested=cfg.reps,
        cores=cfg.cores,
        cap=cfg.cap,
        g_bar=0,
        seed=cfg.seed + instance if cfg.gen is not None else None,
    )

    if cfg.mode == "skyline":
        reps = select_representatives(r, cfg.reps) if cfg.reps else None
        sky, m = parallel_skyline(r, plan, reps, cfg.cores)
        if oracle:
            _check_skyline(r, sky)
        report.skyline_size = len(sky)
        report.reps_effective = m.reps_effective
        report.iterations = [IterationRecord(0, m.parallel_max, m.final_tests, m.rep_tests)]
        report.parallel_max_sum = m.parallel_max
        report.final_sum = m.final_tests
        report.simulated_cost = m.simulated_cost
        if cfg.timings:
            report.wall_parallel_ms = round(m.wall_parallel_ms, 3)
            report.wall_total_ms = round(m.wall_total_ms, 3)
        return report

    s = skyline_sfs(r)
    if oracle:
        _check_skyline(r, s)
    gmap, gm = gres_all(s, plan, cfg.reps, cfg.cores, cfg.cap)
    if oracle:
        for t_id, expected in gres_oracle_map(s, r, cfg.cap).items():
            if gmap[t_id] != expected:
                raise OracleMismatch(f"gres of tuple {t_id} is {gmap[t_id]}, oracle says {expected}")
    report.g_bar = gm.g_bar
    report.skyline_size = len(s)
    report.reps_effective = gm.reps_effective
    report.iterations = iteration_records(gm)
    report.parallel_max_sum = gm.parallel_max_sum
    report.final_sum = gm.final_sum
    report.simulated_cost = gm.simulated_cost
    report.gres_hist = gres_histogram(gmap)
    if cfg.timings:
        report.wall_parallel_ms = round(gm.wall_parallel_ms, 3)
        report.wall_total_ms = round(gm.wall_total_ms, 3)
    return report


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Run ``cfg.repetitions`` instances (seeds ``seed + i``) and average them."""
    try:
        cfg.validate()
        reports = []
        for i in range(cfg.repetitions):
            log.info("running %s (instance %d)", cfg.describe(), i)
            reports.append(run_single(cfg, i))
        return aggregate(reports)
    except OracleMismatch:
        raise
    except Exception as exc:
        raise ExperimentError(f"[{cfg.describe()}] {exc}") from exc


SWEEP_FIELDS = ("gen", "n", "d", "seed", "strategy", "partitions", "reps", "cores", "cap")


def expand_sweep(base: ExperimentConfig, **axes: Iterable) -> list[ExperimentConfig]:
    """Cross product of the listed values, in the order the axes are given."""
    known = {f.name for f in fields(ExperimentConfig)}
    for name in axes:
        if name not in known:
            raise ValueError(f"unknown sweep axis {name!r}")
    names = list(axes)
    return [replace(base, **dict(zip(names, combo))) for combo in itertools.product(*(list(axes[k]) for k in names))]


def run_sweep(configs: Iterable[ExperimentConfig]) -> list[RunReport]:
    return [run_experiment(cfg) for cfg in configs]


__all__ = [
    "ExperimentConfig",
    "ExperimentError",
    "ORACLE_LIMIT",
    "OracleMismatch",
    "SWEEP_FIELDS",
    "expand_sweep",
    "load",
    "run_experiment",
    "run_single",
    "run_sweep",
]
