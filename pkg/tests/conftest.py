import pytest

from restricted_cf.enumeration import enumerate_real
from restricted_cf.spectral import solve_dimension

BIG_N = 2**20


@pytest.fixture(scope="session")
def big_table_2():
    """Omega_{N,2} up to 2^20, shared by the asymptotic checks."""
    return enumerate_real(2, BIG_N, collect_lengths=True, w_grid=(-0.1, 0.0, 0.1))


@pytest.fixture(scope="session")
def delta_2():
    return solve_dimension(2).delta


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary."""

    def _report(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
