from __future__ import annotations

import pytest

ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion under ``(number, title)``."""
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    ACCEPTANCE[number] = (title, None)
    yield
    rep = getattr(request.node, "rep_call", None)
    ACCEPTANCE[number] = (title, bool(rep and rep.passed))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[number]
        status = "PASS" if ok else ("FAIL" if ok is False else "NOT RUN")
        tr.write_line(f"[{status}] {number:2d}. {title}")
    passed = sum(1 for _, ok in ACCEPTANCE.values() if ok)
    tr.write_line(f"{passed}/{len(ACCEPTANCE)} acceptance criteria passed")
