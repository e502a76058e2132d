import sys

import pytest

from degen_waves import verify, waves


@pytest.fixture(scope="session")
def composite():
    """p=2, mu=1, u-=-1, u+=1 with the builtin flux."""
    return waves.make_composite(2.0, 1.0, -1.0, 1.0)


@pytest.fixture(scope="session")
def standard():
    """The acceptance run (about 15 s); shared by solver and acceptance tests."""
    return verify.standard_run()


def pytest_terminal_summary(terminalreporter):
    mod = next((m for n, m in sys.modules.items() if n.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
