import numpy as np
import pytest

from crossbar_rb.clifford_group import default_table


@pytest.fixture(scope="session")
def table():
    return default_table()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE: list[tuple[int, str]] = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion, then assert on it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE, key=lambda item: item[0]):
            terminalreporter.write_line(line)
