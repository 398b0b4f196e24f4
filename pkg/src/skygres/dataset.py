"""Dataset CSV files and min-max normalization.

Format: UTF-8, a header line naming the attributes, then one tuple per line;
comma separator, decimal point, no thousands separators. Tuple ids follow
row order starting at 0.
"""

from __future__ import annotations

import csv
import math
import os
from typing import Sequence

import numpy as np

from .core import Relation


class DatasetError(ValueError):
    pass


def ingest_csv(path: str | os.PathLike) -> Relation:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, expected a header line") from None
        d = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d:
                raise DatasetError(f"{path}: row {lineno} has {len(row)} columns, expected {d}")
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {lineno}, column {col} ({header[col - 1]!r}): not a number: {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(f"{path}: row {lineno}, column {col}: non-finite value {cell!r}")
                if v < 0:
                    raise DatasetError(f"{path}: row {lineno}, column {col}: negative value {cell!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        return Relation.empty(d)
    return Relation(np.asarray(rows, dtype=np.float64), d=d)


def write_csv(r: Relation, path: str | os.PathLike, header: Sequence[str] | None = None) -> None:
    header = list(header) if header is not None else [f"a{j + 1}" for j in range(r.d)]
    if len(header) != r.d:
        raise DatasetError("header length differs from the relation's arity")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in r.values.tolist():
            w.writerow([repr(v) for v in row])


def normalize(r: Relation) -> Relation:
    """Min-max scale each attribute to [0, 1]; constant attributes become 0."""
    if len(r) == 0:
        return r
    v = r.values
    lo = v.min(axis=0)
    span = v.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (v - lo) / safe, 0.0)
    return Relation(np.clip(out, 0.0, 1.0), r.ids, d=r.d)


__all__ = ["DatasetError", "ingest_csv", "normalize", "write_csv"]
