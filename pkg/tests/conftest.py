import pytest

from rauzylab.sadic import limit_sequences, parse_directive

TRIBONACCI_31 = "1213121121312121312112131213121"
FIBONACCI_29 = "21121121211211212112121121121"


@pytest.fixture(scope="session")
def tribonacci_directive():
    return parse_directive("tribonacci")


@pytest.fixture(scope="session")
def fibonacci_directive():
    return parse_directive("fibonacci")


@pytest.fixture(scope="session")
def tribonacci_word(tribonacci_directive):
    return limit_sequences(tribonacci_directive)[0].prefix(100_000)


@pytest.fixture(scope="session")
def fibonacci_word(fibonacci_directive):
    seq = [s for s in limit_sequences(fibonacci_directive) if s.first_letter == 2][0]
    return seq.prefix(100_000)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
