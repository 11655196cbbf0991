import sys

import pytest

from lmfractal.rng import stream


@pytest.fixture
def rng(request):
    """Fresh generator keyed by the test name."""
    return stream(1234, request.node.name)



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
