import sys

import numpy as np
import pytest

from evokit.operators import SX, SY, SZ


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qubit():
    """H0 = (w/2) sz, H1 = g sx with w = g = 1."""
    return 0.5 * SZ, SX


def close(a, b, tol):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) <= tol



def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdict lines recorded during the run."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
