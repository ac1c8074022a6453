import numpy as np
import pytest

from eegpref.pipeline import extract_features
from eegpref.synthgen import SynthConfig, generate


@pytest.fixture(scope="session")
def default_dataset():
    return generate(SynthConfig())


@pytest.fixture(scope="session")
def default_matrix(default_dataset):
    matrix, _ = extract_features(default_dataset.recordings, default_dataset.labels)
    return matrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _ACCEPTANCE_LINES.extend(v for k, v in report.user_properties if k == "acceptance")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
