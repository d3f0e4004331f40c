import math
import sys

import numpy as np
import pytest

from slms import PerPieceConstant, Tabulated, find_eigenvalues, reference_problem, validate
from slms.problem import ProblemSpec


def stepped_problem():
    """delta = 2, gamma = 3, q = 1 / 0 / -1 on the three pieces, reference BCs."""
    return reference_problem(delta=2.0, gamma=3.0, potential=PerPieceConstant(1.0, 0.0, -1.0))


def stepped_params():
    return dict(a=0.0, b=math.pi, epsilon=math.pi / 4, beta1=0.0, beta2=1.0, alpha1=1.0,
                alpha2=0.0, alpha1p=0.0, alpha2p=-1.0, delta=2.0, gamma=3.0, q=(1.0, 0.0, -1.0))


def tabulated_problem():
    """General BCs, delta = 0.5, gamma = 2, q sampled from 2 cos(2x) + x on each piece."""
    a, b, eps = 0.0, 2.0, 0.3
    theta = 1.0
    bounds = [(a, theta - eps), (theta - eps, theta + eps), (theta + eps, b)]
    tables = []
    for lo, hi in bounds:
        xs = np.linspace(lo, hi, 9)
        tables.append((tuple(xs), tuple(2 * np.cos(2 * xs) + xs)))
    return validate(ProblemSpec(a=a, b=b, epsilon=eps, beta1=1.0, beta2=0.5, alpha1=1.0,
                                alpha2=0.5, alpha1p=0.5, alpha2p=-1.0, delta=0.5, gamma=2.0,
                                potential=Tabulated(*tables)))


PROBLEMS = {
    "reference": reference_problem,
    "stepped": stepped_problem,
    "tabulated": tabulated_problem,
}


@pytest.fixture(scope="session")
def ref():
    return reference_problem()


@pytest.fixture(scope="session")
def stepped():
    return stepped_problem()


@pytest.fixture(scope="session")
def tabulated():
    return tabulated_problem()


@pytest.fixture(scope="session", params=list(PROBLEMS))
def any_problem(request):
    return PROBLEMS[request.param]()


@pytest.fixture(scope="session")
def ref_spectrum(ref):
    return find_eigenvalues(ref, 40)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
