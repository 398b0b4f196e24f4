import numpy as np
import pytest

from skygres import GenSpec, Relation, generate


def make_relation(seed: int, n: int, d: int, kind: str = "uni") -> Relation:
    """Random relation in [0, 1)^d.

    ``kind``: ``uni``, ``ant`` (datagen), or ``coarse`` (values on a 0.1 grid,
    so ties and duplicate tuples are common).
    """
    if kind in ("uni", "ant"):
        return generate(GenSpec(n, d, kind, seed))
    rng = np.random.default_rng(seed)
    return Relation(np.floor(rng.random((n, d)) * 10) / 10)


@pytest.fixture
def rel():
    return make_relation


# -- acceptance summary -----------------------------------------------------
# Tests marked ``@pytest.mark.criterion(n, title)`` are collected into one
# PASS/FAIL line per criterion at the end of the run.

_criteria: dict[int, dict] = {}



@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "notes": []})
    entry["ok"] &= rep.passed
    entry["notes"] += [str(v) for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        line = f"criterion {n:2d} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}"
        terminalreporter.write_line(line)
        for note in e["notes"]:
            terminalreporter.write_line(f"              {note}")
