import math

import pytest

from expsamp import (
    QuadratureSpec,
    bspline_kernel,
    fejer_kernel,
    jackson_kernel,
    make_h1,
    make_h2,
)


@pytest.fixture(scope="session")
def b2():
    return bspline_kernel(2)


@pytest.fixture(scope="session")
def b3():
    return bspline_kernel(3)


@pytest.fixture(scope="session")
def b4():
    return bspline_kernel(4)


@pytest.fixture(scope="session")
def fejer():
    return fejer_kernel(math.pi, 0.0)


@pytest.fixture(scope="session")
def jackson():
    return jackson_kernel(1.05, 1)


@pytest.fixture(scope="session")
def h1():
    return make_h1()


@pytest.fixture(scope="session")
def h2():
    return make_h2()


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()
