import numpy as np
import pytest

from ppg2ecg.synth import SynthConfig, generate


@pytest.fixture(scope="session")
def clean_session():
    """Noiseless linear-coupling session with a 60-sample PPG delay."""
    return generate(SynthConfig(seed=1, ppg_delay=60))


@pytest.fixture(scope="session")
def short_session():
    return generate(SynthConfig(seed=4, duration_s=60.0, ppg_delay=30))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
