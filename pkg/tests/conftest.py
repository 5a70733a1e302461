import numpy as np
import pytest

from rapidpd.core import CsiFrame, DetectorConfig, SubcarrierGrid


@pytest.fixture
def grid():
    return SubcarrierGrid()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_frames(n, stream=0, k=8, rate=20.0, start_us=0, seed=0):
    """n gap-free frames at ``rate`` with random complex values."""
    r = np.random.default_rng(seed)
    period = int(round(1e6 / rate))
    return [
        CsiFrame(start_us + i * period, stream, r.standard_normal(k) + 1j * r.standard_normal(k), 1.0)
        for i in range(n)
    ]


@pytest.fixture
def config():
    return DetectorConfig()


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, name, ok, detail=""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {name} ({detail})"
        print(line)
        request.config.stash.setdefault(ACCEPTANCE, []).append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
