"""Two-phase partitioned skyline: local skylines in parallel, then a sequential merge."""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ContractViolation, DominanceCounter, Relation, concat, skyline_sfs
from .partition import (
    GridCell,
    PartitionPlan,
    RepresentativeSet,
    Strategy,
    filter_with_representatives,
    prune_grid_dominated,
)


@dataclass
class PhaseMetrics:
    per_partition_tests: list[int]
    final_tests: int
    cores: int
    p: int
    rep_tests: int = 0
    reps_effective: int = 0
    phase1_input: int = 0
    phase2_input: int = 0
    wall_parallel_ms: float = 0.0
    wall_total_ms: float = 0.0

    @property
    def parallel_max(self) -> int:
        return max(self.per_partition_tests, default=0)

    @property
    def scale_factor(self) -> int:
        return math.ceil(self.p / self.cores)

    @property
    def simulated_cost(self) -> int:
        return self.parallel_max * self.scale_factor + self.final_tests


@dataclass
class ConcurrencyProbe:
    """High-water mark of partition tasks running at the same time.

    ``hold`` keeps each task inside the probe for that many seconds, which
    makes overlap observable in tests.
    """

    hold: float = 0.0
    current: int = 0
    high_water: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def enter(self) -> None:
        with self._lock:
            self.current += 1
            self.high_water = max(self.high_water, self.current)
        if self.hold:
            time.sleep(self.hold)

    def exit(self) -> None:
        with self._lock:
            self.current -= 1


def _groups(pids: np.ndarray, p: int) -> list[np.ndarray]:
    order = np.argsort(pids, kind="stable")
    bounds = np.searchsorted(pids[order], np.arange(p + 1))
    return [order[bounds[j] : bounds[j + 1]] for j in range(p)]


def _local_task(r: Relation, idx: np.ndarray, reps: Relation, probe: ConcurrencyProbe | None):
    if probe is not None:
        probe.enter()
    try:
        c = DominanceCounter()
        part = filter_with_representatives(r.take(idx), reps, c)
        local = skyline_sfs(part, c)
        return local, c.count
    finally:
        if probe is not None:
            probe.exit()


def grid_survivors(r: Relation, plan: PartitionPlan, pids: np.ndarray) -> np.ndarray:
    """Boolean mask of tuples whose grid cell is not grid-dominated by an occupied cell."""
    occupancy = np.bincount(pids, minlength=plan.p)
    cells = {GridCell.of_partition(j, plan.m, plan.d): int(n) for j, n in enumerate(occupancy) if n}
    alive = np.zeros(plan.p, dtype=bool)
    for cell in prune_grid_dominated(cells):
        alive[cell.partition_id(plan.m)] = True
    return alive[pids]


def parallel_skyline(
    r: Relation,
    plan: PartitionPlan,
    reps: RepresentativeSet | None = None,
    cores: int = 1,
    executor: Executor | None = None,
    probe: ConcurrencyProbe | None = None,
) -> tuple[Relation, PhaseMetrics]:
    """Skyline of ``r`` computed partition by partition, then merged.

    Each partition task owns its counter. Local skylines are merged in
    ascending partition id, so the counts do not depend on scheduling.
    At most ``cores`` tasks run at once; a caller-supplied ``executor`` is
    assumed to respect that bound.
    """
    if cores < 1:
        raise ContractViolation("cores must be >= 1")
    if plan.d != r.d and len(r):
        raise ContractViolation("plan dimensionality differs from the relation")
    rep_rel = reps.tuples if reps is not None else Relation.empty(r.d)
    t0 = time.perf_counter()

    pids = plan.assign(r)
    if plan.strategy is Strategy.GRID and len(r):
        keep = grid_survivors(r, plan, pids)
        pids = np.where(keep, pids, -1)
    groups = _groups(pids, plan.p)
    phase1_input = int(sum(len(g) for g in groups))

    results: list[tuple[Relation, int] | None] = [None] * plan.p
    busy = [j for j in range(plan.p) if len(groups[j])]
    if executor is None and cores == 1:
        for j in busy:
            results[j] = _local_task(r, groups[j], rep_rel, probe)
    elif executor is None:
        with ThreadPoolExecutor(max_workers=cores) as pool:
            futures = {j: pool.submit(_local_task, r, groups[j], rep_rel, probe) for j in busy}
            for j, fut in futures.items():
                results[j] = fut.result()
    else:
        futures = {j: executor.submit(_local_task, r, groups[j], rep_rel, probe) for j in busy}
        for j, fut in futures.items():
            results[j] = fut.result()
    t1 = time.perf_counter()

    per_partition = [res[1] if res is not None else 0 for res in results]
    union = concat([res[0] for res in results if res is not None], r.d)
    final_counter = DominanceCounter()
    sky = skyline_sfs(union, final_counter)
    t2 = time.perf_counter()

    metrics = PhaseMetrics(
        per_partition_tests=per_partition,
        final_tests=final_counter.count,
        cores=cores,
        p=plan.p,
        rep_tests=reps.tests if reps is not None else 0,
        reps_effective=reps.k_effective if reps is not None else 0,
        phase1_input=phase1_input,
        phase2_input=len(union),
        wall_parallel_ms=(t1 - t0) * 1e3,
        wall_total_ms=(t2 - t0) * 1e3,
    )
    return sky, metrics


__all__ = ["ConcurrencyProbe", "PhaseMetrics", "grid_survivors", "parallel_skyline"]
