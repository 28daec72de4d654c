import math
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from tribilliard.geometry import make_triangle, rational_triangle

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def seeded_irrational(seed: int):
    """Random admissible shape with angles well away from the degenerate cases."""
    rng = random.Random(seed)
    while True:
        a, b = rng.uniform(0.3, 1.6), rng.uniform(0.3, 1.6)
        if a + b < math.pi - 0.3:
            return make_triangle(a, b, 0.01)


@pytest.fixture(scope="session")
def equilateral():
    return rational_triangle(Fraction(1, 3), Fraction(1, 3))


@pytest.fixture(scope="session")
def right_triangle():
    return rational_triangle(Fraction(1, 2), Fraction(1, 4))


@pytest.fixture(scope="session")
def irrational():
    return make_triangle(0.7312, 1.0123, 0.01)


@pytest.fixture(scope="session")
def shapes(equilateral, right_triangle, irrational):
    return {
        "equilateral": equilateral,
        "right": right_triangle,
        "pi5": rational_triangle(Fraction(1, 5), Fraction(1, 5)),
        "irrational": irrational,
    }


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report_criterion():
    """Record (and print) the one-line verdict of an acceptance criterion."""
    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
