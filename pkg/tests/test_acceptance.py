"""Acceptance criteria, one test (or a small group) per criterion.

Run ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion is
printed in the terminal summary.
"""

import itertools
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from skygres.core import DominanceCounter, Relation, Tuple, dominates, skyline_bnl, skyline_oracle, skyline_sfs
from skygres.datagen import GenSpec, generate
from skygres.gres import gres_all, gres_oracle
from skygres.harness import ExperimentConfig, run_single
from skygres.metrics import parse, serialize
from skygres.parallel import grid_survivors, parallel_skyline
from skygres.partition import (
    GridCell,
    PartitionPlan,
    Strategy,
    make_plan,
    prune_grid_dominated,
    rank_slices,
    select_representatives,
    sliced_ids,
)

from conftest import make_relation

DATA = Path(__file__).parent / "data"
STRATEGIES = ["none", "grid", "angular", "sliced"]


def relations(count, n_max, dims, kinds, seed, n_min=5):
    """``count`` seeded random relations with log-uniform sizes."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(round(10 ** rng.uniform(math.log10(n_min), math.log10(n_max))))
        d = dims[i % len(dims)]
        kind = kinds[(i // len(dims)) % len(kinds)]
        yield make_relation(int(rng.integers(2**31)), n, d, kind)


def literal_gres(t: Tuple, r: Relation, cap: int) -> float:
    # membership of t's id in the brute-force skyline of the projected relation
    gaps = [
        abs(a[j] - b[j]) for a in r.values.tolist() for b in r.values.tolist() for j in range(r.d) if a[j] != b[j]
    ]
    if not gaps:
        return 1.0
    g_bar = min(cap, math.floor(1 / min(gaps)))
    exits = []
    for g in range(2, g_bar + 1):
        proj = Relation(np.floor(r.values * g) / g, r.ids)
        if t.id not in skyline_oracle(proj).id_set():
            exits.append(1 / g)
    return min(exits, default=1.0)


@pytest.mark.criterion(1, "oracle skyline equivalence")
def test_c1_skyline_oracle_equivalence(record_property):
    start = time.perf_counter()
    count = 0
    for r in relations(210, 1000, (2, 3, 4), ("uni", "ant"), seed=1):
        expected = skyline_oracle(r).value_set()
        assert skyline_bnl(r).value_set() == expected
        assert skyline_sfs(r).value_set() == expected
        for strategy, p, k in itertools.product(STRATEGIES, (4, 16), (0, 10)):
            reps = select_representatives(r, k) if k else None
            sky, _ = parallel_skyline(r, make_plan(strategy, p, r.d), reps, cores=4)
            assert sky.value_set() == expected, (strategy, p, k)
        count += 1
    elapsed = time.perf_counter() - start
    record_property("detail", f"{count} relations in {elapsed:.1f}s")
    assert elapsed < 120


@pytest.mark.criterion(2, "gres oracle equivalence")
def test_c2_gres_oracle_equivalence(record_property):
    start = time.perf_counter()
    count = 0
    for r in relations(100, 200, (2, 3), ("uni", "ant", "coarse"), seed=2):
        s = skyline_oracle(r)
        expected = {t.id: gres_oracle(t, r, 25) for t in s.tuples}
        if count % 4 == 0:
            assert expected == {t.id: literal_gres(t, r, 25) for t in s.tuples}
        for strategy in STRATEGIES:
            gmap, _ = gres_all(s, make_plan(strategy, 4, r.d), cap=25, cores=2)
            assert gmap == expected, strategy
        count += 1
    elapsed = time.perf_counter() - start
    record_property("detail", f"{count} relations in {elapsed:.1f}s")
    assert elapsed < 300


@pytest.mark.criterion(3, "stability: gres from Sky(r) equals the oracle over r")
def test_c3_stability():
    for r in relations(50, 500, (2, 3), ("uni", "ant", "coarse"), seed=3, n_min=20):
        s = skyline_sfs(r)
        gmap, _ = gres_all(s, cap=25)
        assert gmap == {t.id: gres_oracle(t, r, 25) for t in s.tuples}


@pytest.mark.criterion(4, "plan / cores invariance")
@pytest.mark.parametrize("kind, n, d", [("ant", 1500, 3), ("uni", 3000, 2), ("coarse", 800, 3)])
def test_c4_invariance(kind, n, d):
    r = make_relation(4, n, d, kind)
    s = skyline_sfs(r)
    ref_sky = s.value_set()
    ref_map, _ = gres_all(s)
    for strategy, p, k, cores in itertools.product(STRATEGIES, (4, 16, 32), (0, 1, 10), (1, 2, 8)):
        plan = make_plan(strategy, p, d)
        reps = select_representatives(r, k) if k else None
        sky, _ = parallel_skyline(r, plan, reps, cores)
        assert sky.value_set() == ref_sky
        gmap, _ = gres_all(s, plan, k, cores)
        assert gmap == ref_map, (strategy, p, k, cores)


@pytest.mark.criterion(5, "grid-dominance pruning soundness")
def test_c5_grid_pruning():
    rng = np.random.default_rng(5)
    for m, d in itertools.product(range(1, 5), range(1, 4)):
        cells = list(itertools.product(range(1, m + 1), repeat=d))
        plan = PartitionPlan(Strategy.GRID, m**d, d, m=m)
        for _ in range(40):
            occ = {c: int(rng.integers(0, 3)) if rng.random() < 0.6 else 0 for c in cells}
            kept = prune_grid_dominated(occ)
            for c in cells:
                dominated = any(occ[o] > 0 and all(x < y for x, y in zip(o, c)) for o in cells)
                assert (c not in kept) == dominated
            # populate occupied cells with tuples strictly inside them
            rows = [
                (np.array(c) - 1 + rng.uniform(0.01, 0.99, d)) / m for c, k in occ.items() for _ in range(k)
            ]
            if not rows:
                continue
            r = Relation(np.array(rows))
            pids = plan.assign(r)
            assert {GridCell.of_partition(int(j), m, d).coords for j in pids} <= {c for c in occ if occ[c]}
            alive = grid_survivors(r, plan, pids)
            sky = skyline_oracle(r).id_set()
            assert all(alive[i] for i in sky)


@pytest.mark.criterion(6, "sliced balance for all N <= 10000, p <= 128")
def test_c6_sliced_balance(record_property):
    start = time.perf_counter()
    for n in range(1, 10001):
        for p in range(1, 129):
            sizes = np.bincount(rank_slices(n, p), minlength=p)
            assert len(sizes) == p and sizes.max() - sizes.min() <= 1, (n, p)
    # the same slicing applied to real relations, ties included
    for seed, n in enumerate((1, 7, 100, 999, 4096)):
        r = make_relation(seed, n, 2, "coarse")
        for p in (1, 3, 16, 128):
            sizes = np.bincount(sliced_ids(r, p), minlength=p)
            assert sizes.max() - sizes.min() <= 1
    record_property("detail", f"exhaustive sweep in {time.perf_counter() - start:.1f}s")


def _sort_oracle(r: Relation, k: int) -> set[int]:
    order = sorted(range(len(r)), key=lambda i: (float(r.values[i].sum()), int(r.ids[i])))[:k]
    top = [r.tuples[i] for i in order]
    return {t.id for t in top if not any(dominates(o, t) for o in top)}


@pytest.mark.criterion(7, "representative selection")
@pytest.mark.parametrize("kind", ["uni", "ant", "coarse"])
def test_c7_representatives(kind):
    r = make_relation(7, 10_000, 3, kind)
    for k in (1, 10, 100):
        heap = select_representatives(r, k, method="heap")
        sel = select_representatives(r, k, method="select")
        expected = _sort_oracle(r, k)
        assert heap.tuples.id_set() == sel.tuples.id_set() == expected
        assert heap.k_effective == len(heap.tuples) <= k
        reps = heap.tuples.tuples
        assert not any(dominates(a, b) for a in reps for b in reps)


def _mean_costs(dist, strategies, seeds=range(5)):
    costs = {s: [] for s in strategies}
    for seed in seeds:
        r = generate(GenSpec(100_000, 3, dist, seed))
        s = skyline_sfs(r)
        for strategy in strategies:
            _, gm = gres_all(s, make_plan(strategy, 16, 3), cores=16, cap=25)
            costs[strategy].append(gm.simulated_cost)
    return {k: float(np.mean(v)) for k, v in costs.items()}


@pytest.mark.slow
@pytest.mark.criterion(8, "partitioning beats None on ANT; Sliced on par on UNI")
def test_c8_directional_ant(record_property):
    mean = _mean_costs("ant", STRATEGIES)
    for strategy in ("grid", "angular", "sliced"):
        reduction = 1 - mean[strategy] / mean["none"]
        record_property("detail", f"ANT {strategy}: {reduction:.1%} below none ({mean[strategy]:.0f} vs {mean['none']:.0f})")
    for strategy in ("grid", "angular", "sliced"):
        assert mean[strategy] <= 0.8 * mean["none"], strategy


@pytest.mark.slow
@pytest.mark.criterion(8, "partitioning beats None on ANT; Sliced on par on UNI")
def test_c8_directional_uni(record_property):
    mean = _mean_costs("uni", ["none", "sliced"])
    record_property("detail", f"UNI sliced/none = {mean['sliced'] / mean['none']:.3f}")
    assert mean["sliced"] <= 1.05 * mean["none"]


CLI_RUNS = [
    ["--gen", "ant,uni", "--n", "3000", "--d", "3", "--strategy", "none,grid,angular,sliced", "--format", "csv"],
    ["--gen", "ant", "--n", "2000", "--d", "2", "--reps", "0,10", "--cores", "1,8", "--repeat", "3"],
    ["--gen", "uni", "--n", "5000", "--d", "4", "--mode", "skyline", "--strategy", "grid", "--partitions", "81"],
    ["--dataset", str(DATA / "anticorrelated.csv"), "--cap", "none", "--strategy", "sliced", "--oracle", "--format", "csv"],
]


@pytest.mark.criterion(9, "CLI determinism")
@pytest.mark.parametrize("args", CLI_RUNS, ids=range(len(CLI_RUNS)))
def test_c9_cli_determinism(args, tmp_path):
    outs = []
    for i, hashseed in enumerate(("1", "2")):
        out = tmp_path / f"run{i}"
        subprocess.run(
            [sys.executable, "-m", "skygres", *args, "--out", str(out)],
            check=True,
            env={"PYTHONHASHSEED": hashseed, "PATH": ""},
        )
        outs.append(out.read_bytes())
    assert outs[0] and outs[0] == outs[1]


@pytest.mark.criterion(10, "counter accounting")
@pytest.mark.parametrize("gen, d", [("ant", 2), ("ant", 3), ("uni", 4)])
def test_c10_counter_accounting(gen, d):
    r = make_relation(10, 4000, d, gen)
    c = DominanceCounter()
    s = skyline_sfs(r, c)
    _, m = parallel_skyline(r, make_plan("none", 16, d), None, cores=1)
    assert m.parallel_max == c.count

    # every g iteration runs one sequential SFS over the projected skyline
    gmap, gm = gres_all(s, None, 0, 1)
    for g, pm in gm.iterations:
        cg = DominanceCounter()
        skyline_sfs(s.with_values(np.floor(s.values * g) / g), cg)
        assert pm.parallel_max == cg.count

    for strategy in STRATEGIES:
        cfg = ExperimentConfig(gen=gen, n=4000, d=d, seed=10, strategy=strategy, cores=3, repetitions=1)
        rep = run_single(cfg)
        for fmt in ("csv", "jsonl"):
            (back,) = parse(serialize(rep, fmt), fmt)
            k = math.ceil(back.partitions / back.cores)
            total = sum(it.parallel_max * k + it.final_tests for it in back.iterations)
            assert total == back.simulated_cost == rep.simulated_cost
