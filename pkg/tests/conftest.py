import numpy as np
import pytest

from larchpmle import CoeffSpec, ParamSpace, SimConfig, Theta, simulate

CASE1 = Theta(0.1, 0.2, 1.0)
CASE2 = Theta(0.2, 0.2, 1.0)
CASE1_BETA = 0.799
CASE2_BETA = 0.599


@pytest.fixture(scope="session")
def spec():
    return CoeffSpec("power", 2000)


@pytest.fixture(scope="session")
def farima_spec():
    return CoeffSpec("farima", 2000)


@pytest.fixture(scope="session")
def space():
    return ParamSpace()


@pytest.fixture(scope="session")
def case1_path(spec):
    """One medium case-1 path reused by likelihood/estimator tests."""
    cfg = SimConfig(n=500, burn_in=4000, J=2000, seed=314)
    return simulate(spec, CASE1, cfg)


def brute_zeta_tail(s, t0, terms=1_000_000):
    """Partial sum plus integral bracket midpoint; independent of scipy.

    Returns (estimate, half_bracket_width): the true tail of the summed
    series lies within half_bracket_width of the estimate.
    """
    j = np.arange(t0, t0 + terms, dtype=float)
    head = float(np.sum(j ** -s))
    T = float(t0 + terms)
    low = T ** (1.0 - s) / (s - 1.0)
    high = low * (T / (T - 1.0)) ** (s - 1.0)
    return head + 0.5 * (low + high), 0.5 * (high - low)
