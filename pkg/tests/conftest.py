import zlib

import pytest

from onticlab import BellGeneralizedModel, RngStream

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def bell():
    return BellGeneralizedModel()


@pytest.fixture
def rng(request):
    # one stream per test, stable under test reordering
    return RngStream(20240517, zlib.crc32(request.node.name.encode()))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
