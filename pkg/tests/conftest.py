import pytest

from matrix import SPEC_A1, SPEC_A2, SPEC_K1, SPEC_K2

_CRITERIA: list[str] = []


@pytest.fixture
def spec_k1():
    return SPEC_K1


@pytest.fixture
def spec_k2():
    return SPEC_K2


@pytest.fixture
def spec_a1():
    return SPEC_A1


@pytest.fixture
def spec_a2():
    return SPEC_A2


@pytest.fixture
def criterion():
    """Record one acceptance line and fail the test if the criterion fails."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
