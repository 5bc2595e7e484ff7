import pytest

from poisson_cutout import CircleSpace, space_from_json, ternary

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def tern():
    return ternary()


@pytest.fixture(scope="session")
def golden():
    return space_from_json("golden-two-ratio")


@pytest.fixture(scope="session")
def circle():
    return CircleSpace()


@pytest.fixture(scope="session")
def two_block():
    return space_from_json("two-block-circle")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
