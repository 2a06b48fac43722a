import math

import numpy as np
import pytest

from finsub import NormSpec, make_surjection
from finsub.liealg import candidate_norms, so4

SQRT3 = math.sqrt(3.0)

_ACCEPTANCE_LINES = []


def record_criterion(label: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {label}" + (f"  ({detail})" if detail else "")
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def record():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def randers():
    """The Randers example F1(v, w) = sqrt(2v^2 + 2vw + 2w^2) + v + w."""
    return NormSpec.randers([[2.0, 1.0], [1.0, 2.0]], [1.0, 1.0])


@pytest.fixture
def proj_v():
    return make_surjection([[1.0, 0.0]])


@pytest.fixture(scope="session")
def split():
    return so4()


@pytest.fixture(scope="session")
def so4_norms():
    F, F_hat, F_tilde = candidate_norms()
    return {"F": F, "Fhat": F_hat, "Ftilde": F_tilde}
