import numpy as np
import pytest

from finrank_krr import cos_target, make_legendre, make_tntk, square_target


@pytest.fixture(scope="session")
def tntk7():
    return make_tntk(7)


@pytest.fixture(scope="session")
def leg5():
    return make_legendre(5)


@pytest.fixture(scope="session")
def cos7(tntk7):
    return cos_target(tntk7)


@pytest.fixture(scope="session")
def square5(leg5):
    return square_target(leg5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def square2():
    """x^2 on a rank-2 Legendre kernel: the degree-2 part lands in the complement."""
    return square_target(make_legendre(2))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
