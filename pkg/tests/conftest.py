import os
import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=20240607, help="base seed for randomized acceptance runs")


@pytest.fixture
def seed(request) -> int:
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed) -> random.Random:
    return random.Random(seed)


_verdicts = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""
    table = request.config.stash.setdefault(_verdicts, {})

    def record(name: str, ok: bool, detail: str = "") -> None:
        line = f"{name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        table[name] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    table = config.stash.get(_verdicts, {})
    if table:
        terminalreporter.section("acceptance criteria")
        for name in sorted(table, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(table[name])
