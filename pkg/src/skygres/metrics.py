"""Run reports: aggregation over instances and CSV / JSON-lines serialization.

CSV layout: one row per g iteration, every row repeating the report-level
fields. Columns, in order, are ``CSV_COLUMNS``. ``report`` numbers the
reports inside one file; ``parallel_component`` (``scale_factor *
parallel_max_sum``) and ``scale_factor`` are derived and ignored on parsing.
``gres_hist`` is encoded as ``g:count`` pairs joined by ``;`` where ``g`` is
the reciprocal of the gres value (``1`` means the tuple never left the
skyline). A report without iterations writes no CSV rows.

JSON-lines: one object per report, keys as in ``RunReport``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Sequence

from .gres import GresMetrics


@dataclass
class IterationRecord:
    g: int
    parallel_max: float
    final_tests: float
    rep_tests: float = 0


@dataclass
class RunReport:
    dataset: str
    n: int
    d: int
    mode: str
    strategy: str
    partitions: int
    reps_requested: int
    cores: int
    cap: int | None
    g_bar: int
    seed: int | None = None
    reps_effective: float = 0
    repetitions: int = 1
    skyline_size: float = 0
    parallel_max_sum: float = 0
    final_sum: float = 0
    simulated_cost: float = 0
    wall_parallel_ms: float = 0.0
    wall_total_ms: float = 0.0
    gres_hist: dict[int, float] = field(default_factory=dict)
    iterations: list[IterationRecord] = field(default_factory=list)

    @property
    def scale_factor(self) -> int:
        return math.ceil(self.partitions / self.cores)

    @property
    def parallel_component(self) -> float:
        return self.scale_factor * self.parallel_max_sum

    def config_key(self) -> tuple:
        return (
            self.dataset, self.n, self.d, self.mode, self.strategy, self.partitions,
            self.reps_requested, self.cores, self.cap, self.g_bar,
            tuple(it.g for it in self.iterations),
        )

    def recomputed_cost(self) -> float:
        k = self.scale_factor
        return sum(it.parallel_max * k + it.final_tests for it in self.iterations)

    def check(self) -> None:
        """Raise ``AssertionError`` if totals disagree with the per-g records."""
        close = lambda a, b: math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-9)  # noqa: E731
        assert close(self.parallel_max_sum, sum(it.parallel_max for it in self.iterations))
        assert close(self.final_sum, sum(it.final_tests for it in self.iterations))
        assert close(self.simulated_cost, self.recomputed_cost())
        assert self.wall_parallel_ms <= self.wall_total_ms + 1e-9
        if self.mode == "gres":
            assert close(sum(self.gres_hist.values()), self.skyline_size)


def gres_histogram(gres_map: dict) -> dict[int, int]:
    hist: dict[int, int] = {}
    for v in gres_map.values():
        g = round(1.0 / v)
        hist[g] = hist.get(g, 0) + 1
    return dict(sorted(hist.items()))


def iteration_records(metrics: GresMetrics) -> list[IterationRecord]:
    return [IterationRecord(g, m.parallel_max, m.final_tests, m.rep_tests) for g, m in metrics.iterations]


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def aggregate(reports: Sequence[RunReport]) -> RunReport:
    """Average repeated instances of one configuration field by field."""
    if not reports:
        raise ValueError("nothing to aggregate")
    if len(reports) == 1:
        return reports[0]
    key = reports[0].config_key()
    for r in reports[1:]:
        if r.config_key() != key:
            raise ValueError("cannot aggregate reports with mismatched configs")
    numeric = [
        "reps_effective", "skyline_size", "parallel_max_sum", "final_sum",
        "simulated_cost", "wall_parallel_ms", "wall_total_ms",
    ]
    out = replace(reports[0], **{f: _mean([getattr(r, f) for r in reports]) for f in numeric})
    out.repetitions = sum(r.repetitions for r in reports)
    buckets = sorted({g for r in reports for g in r.gres_hist})
    out.gres_hist = {g: _mean([r.gres_hist.get(g, 0) for r in reports]) for g in buckets}
    out.iterations = [
        IterationRecord(
            its[0].g,
            _mean([it.parallel_max for it in its]),
            _mean([it.final_tests for it in its]),
            _mean([it.rep_tests for it in its]),
        )
        for its in zip(*(r.iterations for r in reports))
    ]
    return out


# -- serialization ----------------------------------------------------------

_REPORT_FIELDS = [f.name for f in fields(RunReport) if f.name not in ("gres_hist", "iterations")]
_ITER_FIELDS = [f.name for f in fields(IterationRecord)]
CSV_COLUMNS = (
    ["report"]
    + _REPORT_FIELDS
    + ["scale_factor", "parallel_component", "gres_hist"]
    + _ITER_FIELDS
)
_STR_FIELDS = {"dataset", "mode", "strategy"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _num(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        return float(s)


def _hist_str(h: dict) -> str:
    return ";".join(f"{g}:{_fmt(c)}" for g, c in sorted(h.items()))


def _hist_parse(s: str) -> dict:
    if not s:
        return {}
    out = {}
    for part in s.split(";"):
        g, c = part.split(":")
        out[int(g)] = _num(c)
    return out


def to_csv(reports: Iterable[RunReport]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for idx, rep in enumerate(reports):
        head = (
            [idx]
            + [_fmt(getattr(rep, f)) for f in _REPORT_FIELDS]
            + [rep.scale_factor, _fmt(rep.parallel_component), _hist_str(rep.gres_hist)]
        )
        for it in rep.iterations:
            w.writerow(head + [_fmt(getattr(it, f)) for f in _ITER_FIELDS])
    return buf.getvalue().encode("utf-8")


def from_csv(data: bytes) -> list[RunReport]:
    rows = list(csv.DictReader(io.StringIO(data.decode("utf-8"))))
    reports: dict[str, RunReport] = {}
    for row in rows:
        rep = reports.get(row["report"])
        if rep is None:
            kw = {f: (row[f] if f in _STR_FIELDS else _num(row[f])) for f in _REPORT_FIELDS}
            rep = reports[row["report"]] = RunReport(**kw, gres_hist=_hist_parse(row["gres_hist"]))
        rep.iterations.append(IterationRecord(**{f: _num(row[f]) for f in _ITER_FIELDS}))
    return list(reports.values())


def to_jsonl(reports: Iterable[RunReport]) -> bytes:
    lines = []
    for rep in reports:
        obj = asdict(rep)
        obj["gres_hist"] = {str(g): c for g, c in sorted(rep.gres_hist.items())}
        lines.append(json.dumps(obj, separators=(",", ":")))
    return "".join(line + "\n" for line in lines).encode("utf-8")


def from_jsonl(data: bytes) -> list[RunReport]:
    out = []
    for line in data.decode("utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        obj["gres_hist"] = {int(g): c for g, c in obj["gres_hist"].items()}
        obj["iterations"] = [IterationRecord(**it) for it in obj["iterations"]]
        out.append(RunReport(**obj))
    return out


def serialize(reports: RunReport | Iterable[RunReport], fmt: str = "jsonl") -> bytes:
    if isinstance(reports, RunReport):
        reports = [reports]
    if fmt == "csv":
        return to_csv(reports)
    if fmt == "jsonl":
        return to_jsonl(reports)
    raise ValueError(f"unknown report format {fmt!r}")


def parse(data: bytes, fmt: str = "jsonl") -> list[RunReport]:
    if fmt == "csv":
        return from_csv(data)
    if fmt == "jsonl":
        return from_jsonl(data)
    raise ValueError(f"unknown report format {fmt!r}")


__all__ = [
    "CSV_COLUMNS",
    "IterationRecord",
    "RunReport",
    "aggregate",
    "gres_histogram",
    "iteration_records",
    "parse",
    "serialize",
]
