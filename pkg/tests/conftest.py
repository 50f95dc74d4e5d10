"""Shared fixtures.  The multiprecision pipelines are expensive, so each one
runs once per session and is reused by the module tests and the acceptance
suite."""
import time

import mpmath
import pytest

from lgfano import asymptotics as asy
from lgfano.cli import load_problem
from lgfano.geometry import WeightSystem


@pytest.fixture(scope="session")
def dp():
    return WeightSystem((1, 1, 1, 1), 3)


@pytest.fixture(scope="session")
def sextic():
    return WeightSystem((1, 1, 1), 6)


@pytest.fixture(scope="session")
def fixture_problem():
    return load_problem


class Timed:
    def __init__(self, value, seconds):
        self.value = value
        self.seconds = seconds


def _timed(fn):
    t = time.time()
    v = fn()
    return Timed(v, time.time() - t)


@pytest.fixture(scope="session")
def dp_reg(dp):
    return asy.regularize_fano(dp, 120, 200)


@pytest.fixture(scope="session")
def dp_cont(dp, dp_reg):
    with mpmath.workprec(200):
        return asy.continue_ode(dp_reg, dp)


@pytest.fixture(scope="session")
def dp_watson(dp, dp_reg, dp_cont):
    return _timed(lambda: asy.watson_check(dp_reg, dp, cont=dp_cont))


@pytest.fixture(scope="session")
def dp_collapse(dp):
    return _timed(lambda: asy.collapse_map_fano(dp, prec=300))


@pytest.fixture(scope="session")
def dp_steepest(dp):
    return _timed(lambda: asy.steepest_leading(dp, prec=300))


@pytest.fixture(scope="session")
def sextic_collapse(sextic):
    return _timed(lambda: asy.collapse_map_gt(sextic, prec=200))
