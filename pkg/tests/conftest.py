import numpy as np
import pytest

from zenoguard.models import ModelParams, build_model

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


BUILTIN_SCHEMES = [
    ("two_level", False),
    ("three_level_chain", False),
    ("four_level_chain", False),
    ("two_level", True),
    ("three_level_chain", True),
    ("four_level_chain", True),
]


def scheme(name, xi=1.0, omega=0.0, gamma=0.0):
    return build_model(name, ModelParams(xi=xi, omega=omega, gamma=gamma))
