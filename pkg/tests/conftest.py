import re
from collections import OrderedDict

import numpy as np
import pytest

from ranktest.core import PairwiseDataset, ProbabilityMatrix, Setting

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n, title = mark.args
            _CRITERIA.setdefault(n, {"title": title, "outcomes": []})


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d+)_", report.nodeid)
    if m is None:
        return
    entry = _CRITERIA.get(int(m.group(1)))
    if entry is None:
        return
    if report.when == "call" or report.outcome != "passed":
        entry["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        elif any(o == "failed" for o in outcomes):
            status = "FAIL"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"criterion {n:2d} [{status}] {entry['title']}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_matrix(d: int, setting: Setting, rng: np.random.Generator) -> ProbabilityMatrix:
    if Setting(setting) is Setting.SYMMETRIC:
        return ProbabilityMatrix.from_upper(rng.random((d, d)))
    m = rng.random((d, d))
    np.fill_diagonal(m, 0.5)
    return ProbabilityMatrix(m, Setting.ASYMMETRIC)


def dataset(d, setting, pairs) -> PairwiseDataset:
    """Dataset from {(i, j): (count, wins)}."""
    k = np.zeros((d, d), dtype=np.int64)
    x = np.zeros((d, d), dtype=np.int64)
    for (i, j), (c, w) in pairs.items():
        k[i, j], x[i, j] = c, w
    return PairwiseDataset(k, x, setting)
