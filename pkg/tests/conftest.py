import pytest

from wban_exposure import NodePosition, Scene


@pytest.fixture
def reference_scene():
    """Tx (1,1), relay (5,6), Rx (15,15) with Table 1 powers and antennas."""
    return Scene(tx=NodePosition(1, 1), relay=NodePosition(5, 6), rx=NodePosition(15, 15))


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    monkeypatch.setenv("WBAN_EXPOSURE_BACKEND", request.param)
    return request.param


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in rep.nodeid and rep.when == "call" or (
                "test_acceptance.py" in rep.nodeid and outcome != "passed"
            ):
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(set(lines)):
            terminalreporter.write_line(f"[{status}] {name}")
