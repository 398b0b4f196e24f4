"""Partitioning strategies, grid-dominance pruning and representative filtering."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import ContractViolation, DominanceCounter, Relation, Tuple, dominance_matrix

ScoreFn = Callable[[np.ndarray], np.ndarray]


class Strategy(str, enum.Enum):
    NONE = "none"
    GRID = "grid"
    ANGULAR = "angular"
    SLICED = "sliced"


@dataclass(frozen=True)
class PartitionPlan:
    strategy: Strategy
    p: int
    d: int
    m: int | None = None
    sort_dim: int = 0

    def __post_init__(self):
        s = self.strategy
        if s is Strategy.NONE and self.p != 1:
            raise ContractViolation("None plan has exactly one partition")
        if s is Strategy.GRID and (self.m is None or self.m < 1 or self.p != self.m**self.d):
            raise ContractViolation("Grid plan requires p == m**d")
        if s is Strategy.ANGULAR and (self.m is None or self.m < 1 or self.d < 2 or self.p != self.m ** (self.d - 1)):
            raise ContractViolation("Angular plan requires d >= 2 and p == m**(d-1)")
        if s is Strategy.SLICED and self.p < 1:
            raise ContractViolation("Sliced plan requires p >= 1")

    def assign(self, r: Relation) -> np.ndarray:
        """Partition id in ``[0, p)`` for every row of ``r``."""
        if self.strategy is Strategy.NONE:
            return np.zeros(len(r), dtype=np.int64)
        if self.strategy is Strategy.GRID:
            return grid_ids(r.values, self.m)
        if self.strategy is Strategy.ANGULAR:
            return angular_ids(r.values, self.m)
        return sliced_ids(r, self.p, self.sort_dim)


def closest_slices(target_p: int, exponent: int) -> int:
    """Smallest m >= 2 whose ``m**exponent`` is closest to ``target_p``."""
    if exponent < 1:
        raise ContractViolation("exponent must be positive")
    best, best_gap = 2, abs(2**exponent - target_p)
    m = 3
    while (m - 1) ** exponent <= target_p:
        gap = abs(m**exponent - target_p)
        if gap < best_gap:
            best, best_gap = m, gap
        m += 1
    return best


def make_plan(strategy: Strategy | str, target_p: int, d: int, sort_dim: int = 0) -> PartitionPlan:
    """Build a plan whose partition count is as close to ``target_p`` as the strategy allows.

    Grid and Angular only admit powers of the slice count; they pick the
    closest such count greater than 1, preferring the smaller m on ties.
    """
    strategy = Strategy(strategy)
    if target_p < 1:
        raise ContractViolation("target partition count must be >= 1")
    if strategy is Strategy.NONE:
        return PartitionPlan(strategy, 1, d)
    if strategy is Strategy.GRID:
        m = closest_slices(target_p, d)
        return PartitionPlan(strategy, m**d, d, m)
    if strategy is Strategy.ANGULAR:
        if d < 2:
            raise ContractViolation("Angular partitioning needs d >= 2")
        m = closest_slices(target_p, d - 1)
        return PartitionPlan(strategy, m ** (d - 1), d, m)
    return PartitionPlan(strategy, target_p, d, sort_dim=sort_dim)


# -- Grid -------------------------------------------------------------------


def grid_coords(values: np.ndarray, m: int) -> np.ndarray:
    """0-based cell index per dimension; value 1.0 is clamped into the top cell."""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values < 0) or np.any(values > 1):
        raise ContractViolation("grid partitioning needs values in [0, 1]; normalize first")
    return np.minimum(np.floor(values * m).astype(np.int64), m - 1)


def cell_id(coords: np.ndarray, m: int) -> np.ndarray:
    weights = m ** np.arange(coords.shape[-1], dtype=np.int64)
    return coords @ weights


def grid_ids(values: np.ndarray, m: int) -> np.ndarray:
    return cell_id(grid_coords(values, m), m)


def assign_grid(t: Tuple | Sequence[float], m: int, d: int) -> int:
    vals = np.asarray(t.values if isinstance(t, Tuple) else t, dtype=np.float64)
    if vals.shape != (d,):
        raise ContractViolation(f"expected arity {d}")
    if m < 1:
        raise ContractViolation("m must be >= 1")
    return int(grid_ids(vals[None, :], m)[0])


@dataclass(frozen=True, order=True)
class GridCell:
    """Grid coordinates, 1-based in every dimension."""

    coords: tuple[int, ...]

    @classmethod
    def of_partition(cls, pid: int, m: int, d: int) -> "GridCell":
        out = []
        for _ in range(d):
            pid, rem = divmod(pid, m)
            out.append(rem + 1)
        return cls(tuple(out))

    def partition_id(self, m: int) -> int:
        return sum((c - 1) * m**i for i, c in enumerate(self.coords))


def _coords(cell) -> tuple[int, ...]:
    return cell.coords if isinstance(cell, GridCell) else tuple(cell)


def grid_dominates(a, b) -> bool:
    """True iff ``a`` is strictly smaller than ``b`` in every grid coordinate."""
    ca, cb = _coords(a), _coords(b)
    if len(ca) != len(cb):
        raise ContractViolation("grid cells differ in dimensionality")
    return all(x < y for x, y in zip(ca, cb))


def prune_grid_dominated(cells: Mapping) -> set:
    """Cells not grid-dominated by any non-empty cell.

    Keys may be ``GridCell`` instances or coordinate tuples; the returned set
    uses the same keys. Empty cells survive only if nothing dominates them.
    """
    occupied = [c for c, n in cells.items() if n > 0]
    if not occupied:
        return set(cells)
    arr = np.array([_coords(c) for c in occupied], dtype=np.int64)
    keep = set()
    for key in cells:
        c = np.asarray(_coords(key), dtype=np.int64)
        if not np.any(np.all(arr < c, axis=1)):
            keep.add(key)
    return keep


# -- Angular ----------------------------------------------------------------


def to_hyperspherical(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Radius and the ``d - 1`` angles, ``phi_i = atan2(|x[i+1:]|, x[i])``.

    For non-negative input every angle lies in ``[0, pi/2]``.
    """
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    tail = np.sqrt(np.cumsum(v[:, ::-1] ** 2, axis=1)[:, ::-1])
    radius = tail[:, 0]
    angles = np.arctan2(tail[:, 1:], v[:, :-1])
    return radius, angles


def from_hyperspherical(radius: np.ndarray, angles: np.ndarray) -> np.ndarray:
    radius = np.atleast_1d(np.asarray(radius, dtype=np.float64))
    angles = np.atleast_2d(np.asarray(angles, dtype=np.float64))
    n, k = angles.shape
    out = np.empty((n, k + 1))
    sin_prod = radius.copy()
    for i in range(k):
        out[:, i] = sin_prod * np.cos(angles[:, i])
        sin_prod = sin_prod * np.sin(angles[:, i])
    out[:, k] = sin_prod
    return out


def angular_ids(values: np.ndarray, m: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[1] < 2:
        raise ContractViolation("Angular partitioning needs d >= 2")
    if np.any(values < 0):
        raise ContractViolation("Angular partitioning needs non-negative values")
    if values.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    _, angles = to_hyperspherical(values)
    idx = np.minimum(np.floor(2.0 * angles / math.pi * m).astype(np.int64), m - 1)
    # all-zero tuples: atan2(0, 0) == 0, so they already land in partition 0
    return cell_id(idx, m)


def assign_angular(t: Tuple | Sequence[float], m: int, d: int) -> int:
    vals = np.asarray(t.values if isinstance(t, Tuple) else t, dtype=np.float64)
    if vals.shape != (d,):
        raise ContractViolation(f"expected arity {d}")
    return int(angular_ids(vals[None, :], m)[0])


# -- Sliced -----------------------------------------------------------------


def assign_sliced(rank: int, p: int, n: int) -> int:
    """Partition of the tuple at 1-based position ``rank`` in the sorted order."""
    if not 1 <= rank <= n:
        raise ContractViolation("rank must be in [1, N]")
    return (rank - 1) * p // n


def rank_slices(n: int, p: int) -> np.ndarray:
    """Partition of every 0-based sorted position ``0 .. n-1``."""
    return np.arange(n, dtype=np.int64) * p // n


def sliced_ids(r: Relation, p: int, sort_dim: int = 0) -> np.ndarray:
    """Sort on one attribute (ties by id) and cut into ``p`` equi-numerous slices."""
    n = len(r)
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    order = np.lexsort((r.ids, r.values[:, sort_dim]))
    out[order] = rank_slices(n, p)
    return out


# -- Representatives --------------------------------------------------------


def score_sum(values: np.ndarray) -> np.ndarray:
    return np.asarray(values).sum(axis=1)


@dataclass(frozen=True)
class RepresentativeSet:
    tuples: Relation
    k_requested: int
    k_effective: int
    tests: int = 0

    def __len__(self) -> int:
        return self.k_effective

    @classmethod
    def empty(cls, d: int) -> "RepresentativeSet":
        return cls(Relation.empty(d), 0, 0)


def _top_k_heap(keys: list[tuple[float, int]], k: int) -> list[int]:
    # max-heap of the k best seen so far, keyed by (score, id)
    heap = [(-s, -i, pos) for pos, (s, i) in enumerate(keys[:k])]
    heapq.heapify(heap)
    for pos in range(k, len(keys)):
        s, i = keys[pos]
        ns, ni, _ = heap[0]
        if (s, i) < (-ns, -ni):
            heapq.heapreplace(heap, (-s, -i, pos))
    return sorted((pos for _, _, pos in heap), key=lambda q: keys[q])


def _quickselect(items: list, k: int) -> None:
    """Reorder ``items`` in place so the k smallest occupy ``items[:k]``."""
    lo, hi = 0, len(items) - 1
    target = k - 1
    while lo < hi:
        mid = (lo + hi) // 2
        a, b, c = items[lo], items[mid], items[hi]
        pivot = sorted((a, b, c))[1]
        i, j = lo, hi
        while i <= j:
            while items[i] < pivot:
                i += 1
            while items[j] > pivot:
                j -= 1
            if i <= j:
                items[i], items[j] = items[j], items[i]
                i += 1
                j -= 1
        if target <= j:
            hi = j
        elif target >= i:
            lo = i
        else:
            return


def _top_k_select(keys: list[tuple[float, int]], k: int) -> list[int]:
    items = [(s, i, pos) for pos, (s, i) in enumerate(keys)]
    _quickselect(items, k)
    return [pos for _, _, pos in sorted(items[:k])]


def select_representatives(
    r: Relation,
    k: int,
    f: ScoreFn | None = None,
    method: str = "heap",
) -> RepresentativeSet:
    """Top-k tuples of ``r`` under the monotone score ``f``, minus dominated ones.

    ``f`` maps an ``(N, d)`` array to ``N`` scores (default: attribute sum).
    ``method`` is ``"heap"`` (bounded max-heap, O(N log k)) or ``"select"``
    (quickselect around the k-th smallest, then sort the k). Equal scores
    are broken by smaller id. Dominance tests among the chosen tuples are
    reported in ``tests``.
    """
    if k < 0:
        raise ContractViolation("k must be >= 0")
    f = f or score_sum
    n = len(r)
    kk = min(k, n)
    if kk == 0:
        return RepresentativeSet(Relation.empty(r.d), k, 0)
    scores = np.asarray(f(r.values), dtype=np.float64)
    keys = list(zip(scores.tolist(), r.ids.tolist()))
    if method == "heap":
        chosen = _top_k_heap(keys, kk)
    elif method == "select":
        chosen = _top_k_select(keys, kk)
    else:
        raise ValueError(f"unknown selection method {method!r}")
    top = r.take(np.asarray(chosen, dtype=np.int64))
    keep, tests = undominated_mask(top.values)
    reps = top.take(keep)
    return RepresentativeSet(reps, k, len(reps), tests)


def undominated_mask(values: np.ndarray) -> tuple[np.ndarray, int]:
    """Rows dominated by no other row, and the number of tests spent finding out.

    Each row is checked against the others in order up to its first dominator.
    """
    n = values.shape[0]
    dom = dominance_matrix(values, values)
    keep = ~dom.any(axis=1)
    # row i scans the other n - 1 rows in order up to its first dominator
    first = dom.argmax(axis=1)
    tests = int(np.where(keep, n - 1, first + (first < np.arange(n))).sum()) if n else 0
    return keep, tests


def filter_with_representatives(
    part: Relation, reps: RepresentativeSet | Relation, c: DominanceCounter | None = None
) -> Relation:
    """Drop every tuple of ``part`` dominated by some representative.

    Each tuple is compared against the representatives in order until the
    first one that dominates it; every comparison counts as a test.
    """
    rel = reps.tuples if isinstance(reps, RepresentativeSet) else reps
    k = len(rel)
    if k == 0 or len(part) == 0:
        return part
    if rel.d != part.d:
        raise ContractViolation("representatives and partition differ in arity")
    hit = np.empty(len(part), dtype=bool)
    tests = 0
    step = max(1, 2**20 // k)
    for lo in range(0, len(part), step):
        dom = dominance_matrix(rel.values, part.values[lo : lo + step])
        h = dom.any(axis=1)
        tests += int(np.where(h, dom.argmax(axis=1) + 1, k).sum())
        hit[lo : lo + step] = h
    if c is not None:
        c.add(tests)
    return part.take(~hit)


__all__ = [
    "GridCell",
    "PartitionPlan",
    "RepresentativeSet",
    "Strategy",
    "angular_ids",
    "assign_angular",
    "assign_grid",
    "assign_sliced",
    "closest_slices",
    "filter_with_representatives",
    "from_hyperspherical",
    "grid_coords",
    "grid_dominates",
    "grid_ids",
    "make_plan",
    "prune_grid_dominated",
    "score_sum",
    "select_representatives",
    "rank_slices",
    "sliced_ids",
    "to_hyperspherical",
    "undominated_mask",
]
