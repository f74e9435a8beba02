import pytest

from adspricing.model import validate_params


@pytest.fixture
def base():
    """q=2, alpha=0.6, gamma=1.3, v=1, c_v=1, c_h=0.1."""
    return validate_params(2.0, 1.3, 0.6)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL verdict that is echoed in the terminal summary."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _VERDICTS.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))
        print(_VERDICTS[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
