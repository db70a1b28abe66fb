import pytest

from kcmlab.family.family import parse_family, zoo


@pytest.fixture(scope="session")
def two_neighbour():
    return zoo("two_neighbour")


@pytest.fixture(scope="session")
def unbalanced():
    """The four-rule critical family with difficulties 1 toward e1 and 2 elsewhere."""
    return zoo("unbalanced_rooted")


@pytest.fixture(scope="session")
def duarte():
    return zoo("duarte")


@pytest.fixture(scope="session")
def right_only():
    return parse_family("1 0", "right_only")


@pytest.fixture(scope="session")
def opposite_pair():
    return parse_family("1 0; -1 0", "opposite_pair")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
