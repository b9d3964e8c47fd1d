import logging

import numpy as np
import pytest

from discrim import io, presets
from discrim.povm_opt import minimum_error, povm_tradeoff_curve
from discrim.pvm_opt import pvm_tradeoff_curve

logging.getLogger("discrim").setLevel(logging.ERROR)

# Restarts for curve sweeps in tests; the warm sweeps recover the full-restart curve.
CURVE_RESTARTS = 4


@pytest.fixture(scope="session")
def two():
    return presets.two_state()


@pytest.fixture(scope="session")
def three():
    return presets.three_state()


@pytest.fixture(scope="session")
def p_me_two():
    return 0.5 * (1 - np.sqrt(0.5))


@pytest.fixture(scope="session")
def p_me_three(three):
    return minimum_error(three)


@pytest.fixture(scope="session")
def grids(two, three, p_me_two, p_me_three):
    return {
        2: io.parse_eps_grid(io.DEFAULT_GRID, p_me_two),
        3: io.parse_eps_grid(io.DEFAULT_GRID, p_me_three),
    }


@pytest.fixture(scope="session")
def curves(two, three, grids):
    """PVM and POVM curves on the shared 40-point grids, keyed by (n, measurement)."""
    out = {}
    for e in (two, three):
        out[e.n, "pvm"] = pvm_tradeoff_curve(e, grids[e.n], restarts=CURVE_RESTARTS, seed=0)
        out[e.n, "povm"] = povm_tradeoff_curve(e, grids[e.n])
    return out


# acceptance criteria report: one line per criterion in the terminal summary
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
