from __future__ import annotations

from collections import defaultdict

import pytest

from treepatterns.analysis import AnalysisConfig, analyze
from treepatterns.pattern import named_pattern

# criterion number -> list of (test id, outcome)
_ACCEPTANCE: dict[int, list[tuple[str, str]]] = defaultdict(list)
_NOTES: dict[int, str] = {}


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "acceptance(k): part of acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item: pytest.Item, call: pytest.CallInfo):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    k = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        if hasattr(rep, "wasxfail"):
            state = "xfail"
            _NOTES[k] = rep.wasxfail
        else:
            state = rep.outcome
        _ACCEPTANCE[k].append((item.name, state))


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[k]
        ok = all(state == "passed" for _, state in parts)
        line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'}"
        if not ok:
            bad = ", ".join(f"{name} ({state})" for name, state in parts if state != "passed")
            line += f"  [{bad}]"
            if k in _NOTES:
                line += f"  reason: {_NOTES[k]}"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig1():
    return named_pattern("paper:fig1")


@pytest.fixture(scope="session")
def fig7():
    return named_pattern("paper:fig7")


@pytest.fixture(scope="session")
def fig1_reports(fig1):
    return {b: analyze(fig1, AnalysisConfig(builder=b)) for b in ("naive", "compact")}


@pytest.fixture(scope="session")
def fig7_report(fig7):
    return analyze(fig7, AnalysisConfig(builder="compact", sigma2=True, validate=False))
