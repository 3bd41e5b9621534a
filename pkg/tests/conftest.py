import numpy as np
import pytest

from rcond.core import RandomVector, ScenarioSpace

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        n, label = marker
        _CRITERIA.setdefault(n, []).append((label, report.passed))


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    m = request.node.get_closest_marker("criterion")
    if m is not None:
        record_property("criterion", (m.args[0], m.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        parts = _CRITERIA[n]
        ok = all(p for _, p in parts)
        detail = "; ".join(f"{label}={'pass' if p else 'FAIL'}" for label, p in parts)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({detail})")


def make_space(rng, n, cells=1, with_q=True):
    labels = np.concatenate([np.arange(cells), rng.integers(0, cells, n - cells)])
    wq = rng.uniform(0.2, 1.0, n) if with_q else None
    return ScenarioSpace(rng.uniform(0.2, 1.0, n), wq, labels)


def make_vector(rng, n, dim=1, cells=1, scale=1.0):
    return RandomVector(make_space(rng, n, cells), rng.normal(0.0, scale, (n, dim)))
