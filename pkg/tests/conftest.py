import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"
_ACCEPTANCE = []


@pytest.fixture
def acceptance(request):
    """Record a pass/fail line for an acceptance criterion."""
    label = request.node.get_closest_marker("criterion").args[0]
    entry = {"label": label, "detail": "", "ok": False}
    _ACCEPTANCE.append(entry)

    def note(detail):
        entry["detail"] = detail

    yield note
    entry["ok"] = not getattr(request.node, "_failed", False)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and rep.failed:
        item._failed = True


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion id")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for e in _ACCEPTANCE:
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"[{status}] {e['label']}  {e['detail']}")
