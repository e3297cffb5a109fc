import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mgss2 import dist  # noqa: E402


@pytest.fixture(scope="session")
def table():
    return dist.default_table()


def pytest_terminal_summary(terminalreporter):
    from acclog import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
