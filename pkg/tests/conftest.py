import sys

import pytest

from unilog.term import SYMBOLS


@pytest.fixture(autouse=True)
def fresh_symbols():
    # arities are global to the process; keep one test's choices from
    # leaking into the next
    snap = SYMBOLS.snapshot()
    yield
    SYMBOLS.restore(snap)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
