import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ORACLES = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())


@pytest.fixture
def oracles():
    return ORACLES


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cplx(pair):
    return complex(pair[0], pair[1])


def cmat(rows):
    return np.array([[complex(*z) for z in row] for row in rows])


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the terminal summary prints them in order."""
    def record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
