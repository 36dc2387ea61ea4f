import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ffmonodromy import builtin_system, linear_focus_focus_model

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def linear():
    return linear_focus_focus_model()


@pytest.fixture(scope="session")
def pendulum():
    return builtin_system("pendulum")


@pytest.fixture(scope="session")
def pendulum2():
    return builtin_system("pendulum2")


@pytest.fixture(scope="session")
def modified1():
    return builtin_system("modified", R=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number, checks, elapsed, limit=None):
        ok = all(passed for _, passed, _ in checks)
        if limit is not None:
            ok = ok and elapsed < limit
        parts = [f"{name}={detail}{'' if passed else ' (failed)'}" for name, passed, detail in checks]
        timing = f"{elapsed:.1f}s" + (f" < {limit:.0f}s" if limit is not None else "")
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  [{timing}]  " + "; ".join(parts)
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
