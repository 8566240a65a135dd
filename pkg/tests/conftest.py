import numpy as np
import pytest

_criteria = {}  # nodeid -> (num, title)
_results = {}  # (num, title) -> (verdict, seconds)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion number and title")


def pytest_collection_modifyitems(items):
    for it in items:
        m = it.get_closest_marker("criterion")
        if m is not None:
            _criteria[it.nodeid] = m.args


def pytest_runtest_logreport(report):
    key = _criteria.get(report.nodeid)
    if key is None:
        return
    if report.when == "call" or report.outcome != "passed":
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        if _results.get(key, ("PASS",))[0] == "PASS":
            _results[key] = (verdict, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), (verdict, secs) in sorted(_results.items()):
        terminalreporter.write_line(f"criterion {num:>2}: {verdict}  {title}  ({secs:.1f}s)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
