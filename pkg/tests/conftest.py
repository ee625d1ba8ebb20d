from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from momentcone.regions import Box

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
SCHEMAS = ROOT / "schemas"


@pytest.fixture
def unit():
    return Box(np.array([0.0]), np.array([1.0]))


@pytest.fixture
def square():
    return Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
