"""Tuples, relations, instrumented dominance and sequential skyline algorithms.

Smaller values are preferred on every attribute.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


class ContractViolation(ValueError):
    """Raised when an operation's precondition does not hold."""


@dataclass(frozen=True)
class Tuple:
    id: int
    values: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


@dataclass
class DominanceCounter:
    """Number of dominance tests performed by one task."""

    count: int = 0

    def add(self, n: int = 1) -> None:
        self.count += n


def _vals(t) -> Sequence[float]:
    return t.values if isinstance(t, Tuple) else t


class Relation:
    """Immutable ordered collection of tuples sharing arity ``d``.

    Values live in a read-only ``(N, d)`` float64 array; ``ids`` holds the
    stable integer identity of each row.
    """

    def __init__(self, values, ids=None, d: int | None = None):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, d or 0)
        if arr.ndim != 2:
            raise ContractViolation("relation values must be a 2-D array")
        if d is not None and arr.shape[1] != d and arr.shape[0] > 0:
            raise ContractViolation(f"expected arity {d}, got {arr.shape[1]}")
        if arr.shape[0] == 0 and d is not None:
            arr = arr.reshape(0, d)
        if np.any(arr < 0):
            raise ContractViolation("tuple values must be non-negative")
        if ids is None:
            id_arr = np.arange(arr.shape[0], dtype=np.int64)
        else:
            id_arr = np.asarray(ids, dtype=np.int64).reshape(-1)
            if id_arr.shape[0] != arr.shape[0]:
                raise ContractViolation("ids and values differ in length")
            if np.unique(id_arr).size != id_arr.size:
                raise ContractViolation("tuple ids must be unique within a relation")
        arr = np.array(arr, copy=True)
        arr.flags.writeable = False
        id_arr = np.array(id_arr, copy=True)
        id_arr.flags.writeable = False
        self.values = arr
        self.ids = id_arr
        self.d = arr.shape[1]

    @classmethod
    def from_tuples(cls, tuples: Iterable[Tuple | Sequence[float]], d: int | None = None) -> "Relation":
        rows, ids = [], []
        for i, t in enumerate(tuples):
            if isinstance(t, Tuple):
                rows.append(t.values)
                ids.append(t.id)
            else:
                rows.append(tuple(t))
                ids.append(i)
        if not rows:
            return cls(np.empty((0, d or 0)), d=d or 0)
        arity = {len(r) for r in rows}
        if len(arity) != 1:
            raise ContractViolation("all tuples of a relation must share arity")
        return cls(rows, ids, d=d)

    @classmethod
    def _trusted(cls, values: np.ndarray, ids: np.ndarray, d: int) -> "Relation":
        # derived from an already-validated relation; skips the checks
        self = cls.__new__(cls)
        values = np.ascontiguousarray(values, dtype=np.float64).reshape(-1, d)
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        values.flags.writeable = False
        ids.flags.writeable = False
        self.values, self.ids, self.d = values, ids, d
        return self

    @classmethod
    def empty(cls, d: int) -> "Relation":
        return cls(np.empty((0, d)), d=d)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __iter__(self) -> Iterator[Tuple]:
        return iter(self.tuples)

    def __repr__(self) -> str:
        return f"Relation(N={len(self)}, d={self.d})"

    @cached_property
    def tuples(self) -> list[Tuple]:
        return [Tuple(int(i), tuple(float(v) for v in row)) for i, row in zip(self.ids, self.values)]

    def take(self, index) -> "Relation":
        """Sub-relation of the rows selected by an integer or boolean index."""
        return Relation._trusted(self.values[index], self.ids[index], self.d)

    def with_values(self, values) -> "Relation":
        """Same ids, new values (e.g. a grid projection)."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.values.shape:
            raise ContractViolation("replacement values must keep the relation's shape")
        if np.any(values < 0):
            raise ContractViolation("tuple values must be non-negative")
        return Relation._trusted(values, self.ids, self.d)

    def value_set(self) -> Counter:
        """Multiset of value vectors, for comparing skylines irrespective of order."""
        return Counter(tuple(row) for row in self.values.tolist())

    def id_set(self) -> set[int]:
        return set(self.ids.tolist())


def concat(relations: Sequence[Relation], d: int) -> Relation:
    parts = [r for r in relations if len(r)]
    if not parts:
        return Relation.empty(d)
    return Relation._trusted(np.vstack([r.values for r in parts]), np.concatenate([r.ids for r in parts]), d)


def dominates(t, s, c: DominanceCounter | None = None) -> bool:
    """True iff ``t`` is no worse than ``s`` everywhere and strictly better somewhere.

    Counts one test on ``c`` whatever the outcome.
    """
    a, b = _vals(t), _vals(s)
    if len(a) != len(b):
        raise ContractViolation(f"arity mismatch: {len(a)} vs {len(b)}")
    if c is not None:
        c.count += 1
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def skyline_bnl(r: Relation, c: DominanceCounter | None = None) -> Relation:
    """Block-nested-loop skyline with an unbounded in-memory window."""
    c = c if c is not None else DominanceCounter()
    window: list[Tuple] = []
    for t in r.tuples:
        dominated = False
        survivors = []
        for i, w in enumerate(window):
            if dominates(w, t, c):
                dominated = True
                survivors.extend(window[i:])
                break
            if not dominates(t, w, c):
                survivors.append(w)
        window = survivors
        if not dominated:
            window.append(t)
    keep = {w.id for w in window}
    return r.take(np.fromiter((i in keep for i in r.ids.tolist()), dtype=bool, count=len(r)))


_BLOCK_CELLS = 2**20


def sfs_order(values: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Ascending by attribute sum, then lexicographically by values, then by id.

    The lexicographic key guarantees a dominator precedes its victim even when
    floating-point sums tie.
    """
    keys = [ids] + [values[:, j] for j in range(values.shape[1] - 1, -1, -1)] + [values.sum(axis=1)]
    return np.lexsort(keys)


def dominance_matrix(dominators: np.ndarray, victims: np.ndarray) -> np.ndarray:
    """``out[i, k]`` is True iff ``dominators[k]`` dominates ``victims[i]``."""
    d = victims.shape[1]
    le = np.ones((victims.shape[0], dominators.shape[0]), dtype=bool)
    lt = np.zeros_like(le)
    for j in range(d):
        a = dominators[:, j][None, :]
        b = victims[:, j][:, None]
        le &= a <= b
        lt |= a < b
    return le & lt


def first_dominator(window: np.ndarray, row: np.ndarray) -> int:
    """Index of the first window row dominating ``row``, or -1."""
    if window.shape[0] == 0:
        return -1
    mask = dominance_matrix(window, row[None, :])[0]
    hit = int(mask.argmax())
    return hit if mask[hit] else -1


def skyline_sfs(r: Relation, c: DominanceCounter | None = None) -> Relation:
    """Sort-filter-skyline.

    After presorting, no tuple can be dominated by a later one, so the window
    only ever grows. Each candidate is compared against the window in
    insertion order up to its first dominator; the counter records exactly
    the tests that scalar scan performs. Candidates are tested in blocks
    against the window as it stood at the start of the block, and only the
    block's own survivors are then scanned one by one.
    """
    c = c if c is not None else DominanceCounter()
    n = len(r)
    if n == 0:
        return r.take(slice(0, 0))
    d = r.d
    vals = r.values
    order = sfs_order(vals, r.ids)
    window = np.empty((n, d))
    kept = []
    w = 0
    tests = 0
    start = 0
    while start < n:
        w0 = w
        size = min(4096, max(16, _BLOCK_CELLS // max(1, w0)))
        block = order[start : start + size]
        start += size
        rows = vals[block]
        if w0:
            dom = dominance_matrix(window[:w0], rows)
            hit = dom.any(axis=1)
            first = dom.argmax(axis=1)
            tests += int((first[hit] + 1).sum())
        else:
            hit = np.zeros(len(block), dtype=bool)
        for bi in np.flatnonzero(~hit):
            row = rows[bi]
            h = first_dominator(window[w0:w], row)
            if h < 0:
                tests += w
                window[w] = row
                w += 1
                kept.append(block[bi])
            else:
                tests += w0 + h + 1
    c.add(tests)
    return r.take(np.sort(np.asarray(kept, dtype=np.int64)))


def skyline_oracle(r: Relation) -> Relation:
    """Literal all-pairs skyline; test use only."""
    ts = r.tuples
    keep = []
    for i, t in enumerate(ts):
        if not any(dominates(s, t) for s in ts):
            keep.append(i)
    return r.take(np.asarray(keep, dtype=np.int64))


__all__ = [
    "ContractViolation",
    "DominanceCounter",
    "Relation",
    "Tuple",
    "concat",
    "dominance_matrix",
    "dominates",
    "first_dominator",
    "sfs_order",
    "skyline_bnl",
    "skyline_oracle",
    "skyline_sfs",
]
