"""Grid projection and the grid-resistance indicator of skyline tuples."""

from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ContractViolation, Relation, Tuple, skyline_oracle
from .parallel import ConcurrencyProbe, PhaseMetrics, parallel_skyline
from .partition import PartitionPlan, ScoreFn, Strategy, select_representatives

DEFAULT_CAP = 25

GresMap = dict  # tuple id -> 1.0 or 1/g


class GBarUndefined(ValueError):
    """Every tuple carries the same value on every attribute."""


def gproj(values: np.ndarray, g: int) -> np.ndarray:
    """Snap every coordinate down to a multiple of ``1/g``."""
    if g < 1:
        raise ContractViolation("g must be >= 1")
    return np.floor(np.asarray(values, dtype=np.float64) * g) / g


def gproj_tuple(t: Tuple | Sequence[float], g: int) -> Tuple:
    if isinstance(t, Tuple):
        return Tuple(t.id, tuple(gproj(np.asarray(t.values), g).tolist()))
    return Tuple(0, tuple(gproj(np.asarray(t), g).tolist()))


def min_nonzero_gap(r: Relation) -> float | None:
    """Smallest non-zero difference between two values of the same attribute."""
    best = None
    for j in range(r.d):
        col = np.unique(r.values[:, j])
        if col.size < 2:
            continue
        gap = float(np.diff(col).min())
        best = gap if best is None else min(best, gap)
    return best


def compute_g_bar(r: Relation, cap: int | None = DEFAULT_CAP) -> int:
    """``floor(1/l)`` for the smallest non-zero same-attribute gap ``l``, optionally capped."""
    ell = min_nonzero_gap(r)
    if ell is None:
        raise GBarUndefined("g_bar undefined: all tuples are identical")
    inv = 1.0 / ell
    if cap is not None:
        return cap if inv >= cap else int(math.floor(inv))
    if not math.isfinite(inv) or inv >= sys.maxsize:
        raise OverflowError(f"g_bar overflows for l={ell!r}; set a cap")
    return int(math.floor(inv))


@dataclass
class GresMetrics:
    """Per-g phase metrics of one gres computation, in scan order."""

    g_bar: int
    iterations: list[tuple[int, PhaseMetrics]] = field(default_factory=list)

    @property
    def parallel_max_sum(self) -> int:
        return sum(m.parallel_max for _, m in self.iterations)

    @property
    def final_sum(self) -> int:
        return sum(m.final_tests for _, m in self.iterations)

    @property
    def rep_tests(self) -> int:
        return sum(m.rep_tests for _, m in self.iterations)

    @property
    def simulated_cost(self) -> int:
        return sum(m.simulated_cost for _, m in self.iterations)

    @property
    def wall_parallel_ms(self) -> float:
        return sum(m.wall_parallel_ms for _, m in self.iterations)

    @property
    def wall_total_ms(self) -> float:
        return sum(m.wall_total_ms for _, m in self.iterations)

    @property
    def reps_effective(self) -> float:
        if not self.iterations:
            return 0.0
        return sum(m.reps_effective for _, m in self.iterations) / len(self.iterations)


def gres_all(
    s: Relation,
    plan: PartitionPlan | None = None,
    reps_k: int = 0,
    cores: int = 1,
    cap: int | None = DEFAULT_CAP,
    f: ScoreFn | None = None,
    validate: bool = False,
    probe: ConcurrencyProbe | None = None,
) -> tuple[GresMap, GresMetrics]:
    """Grid resistance of every tuple of the skyline ``s``.

    Scans g from g_bar down to 2; at each g the projected skyline is
    recomputed with ``parallel_skyline``, and a tuple whose projection is
    dominated gets ``1/g`` the first time this happens. Tuples that never
    leave get 1. Representatives, if requested, are re-selected from each
    projected relation.
    """
    if validate and skyline_oracle(s).id_set() != s.id_set():
        raise ContractViolation("gres_all input is not a skyline")
    plan = plan or PartitionPlan(Strategy.NONE, 1, s.d)
    if len(s) == 0:
        return {}, GresMetrics(g_bar=0)
    try:
        g_bar = compute_g_bar(s, cap)
    except GBarUndefined:
        # identical tuples never come to dominate one another
        return {int(i): 1.0 for i in s.ids}, GresMetrics(g_bar=1)

    result: GresMap = {}
    metrics = GresMetrics(g_bar=g_bar)
    pool = ThreadPoolExecutor(max_workers=cores) if cores > 1 else None
    try:
        for g in range(g_bar, 1, -1):
            proj = s.with_values(gproj(s.values, g))
            reps = select_representatives(proj, reps_k, f) if reps_k > 0 else None
            sky, m = parallel_skyline(proj, plan, reps, cores, executor=pool, probe=probe)
            metrics.iterations.append((g, m))
            alive = sky.id_set()
            for i in s.ids.tolist():
                if i not in alive and i not in result:
                    result[i] = 1.0 / g
    finally:
        if pool is not None:
            pool.shutdown()
    for i in s.ids.tolist():
        result.setdefault(i, 1.0)
    return {i: result[i] for i in s.ids.tolist()}, metrics


def _pairwise_g_bar(r: Relation, cap: int | None) -> int | None:
    ell = None
    for j in range(r.d):
        col = r.values[:, j]
        diffs = np.abs(col[:, None] - col[None, :])
        nz = diffs[diffs > 0]
        if nz.size:
            ell = float(nz.min()) if ell is None else min(ell, float(nz.min()))
    if ell is None:
        return None
    inv = 1.0 / ell
    if cap is not None and inv >= cap:
        return cap
    return int(math.floor(inv))


def gres_oracle(t: Tuple, r: Relation, cap: int | None = DEFAULT_CAP) -> float:
    """Grid resistance of ``t`` in ``r`` straight from the definition; test use only.

    For every g in ``[2, g_bar]`` the projection of ``t`` is checked against
    every projected tuple of ``r``; the answer is the smallest ``1/g`` at
    which some projection dominates it, else 1. ``g_bar`` comes from an
    all-pairs scan of ``r``.
    """
    return gres_oracle_map([t], r, cap)[t.id]


def gres_oracle_map(ts, r: Relation, cap: int | None = DEFAULT_CAP) -> dict[int, float]:
    """``gres_oracle`` for several tuples, sharing the g_bar scan and projections."""
    ts = list(ts)
    g_bar = _pairwise_g_bar(r, cap)
    exits: dict[int, list[float]] = {t.id: [] for t in ts}
    for g in range(2, (g_bar or 0) + 1):
        pr = np.floor(r.values * g) / g
        for t in ts:
            pt = np.floor(np.asarray(t.values, dtype=np.float64) * g) / g
            if np.any(np.all(pr <= pt, axis=1) & np.any(pr < pt, axis=1)):
                exits[t.id].append(1.0 / g)
    return {i: (min(v) if v else 1.0) for i, v in exits.items()}


__all__ = [
    "DEFAULT_CAP",
    "GBarUndefined",
    "GresMap",
    "GresMetrics",
    "compute_g_bar",
    "gproj",
    "gproj_tuple",
    "gres_all",
    "gres_oracle",
    "gres_oracle_map",
    "min_nonzero_gap",
]
