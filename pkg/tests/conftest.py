import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "divlab",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("divlab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def golden():
    from divlab.small_divisors import Multiplier, golden_mean

    return Multiplier.rotation(golden_mean(), label="golden")


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict; the line is echoed in the terminal summary."""

    def _report(number, title, checks, detail=""):
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        if failed:
            line += f"  failed: {', '.join(failed)}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok, failed

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
