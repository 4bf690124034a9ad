import pytest

from muattack.core import EveHardware, SystemParams


@pytest.fixture
def link():
    """Round-number version of the shipped 3.4 dB link (t = 0.457)."""
    return SystemParams(mu=0.457, t=0.457, t_b=0.6, eta=0.1, p_d=1e-5, f_ec=1.16,
                        visibility=0.973, qber=0.0134)


@pytest.fixture
def eve():
    return EveHardware(t_bs=0.933, t_s=0.794, eta_e=0.8, p_e=2e-8, mu_e=0.457)


ACCEPTANCE_LINES: list[str] = []


def acceptance_report(name: str, ok: bool, detail: str) -> None:
    """Record one acceptance line; printed in the terminal summary."""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    print(ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
