import numpy as np
import pytest
from numpy.polynomial import Polynomial

from collage_mco.assembly import PiecewiseLinearFn, assemble_collage
from collage_mco.basis import Interval, build_multiresolution_basis, merge_breakpoints

# K = 1 + 3x, u = x - x^2 on [0, 1]; -((1+3x)(1-2x))' = 12x - 1
K_TRUE = Polynomial([1.0, 3.0])
U_TRUE = Polynomial([0.0, 1.0, -1.0])
F_SRC = Polynomial([-1.0, 12.0])


def exact_target(basis, n=2001):
    x = merge_breakpoints(np.linspace(0.0, 1.0, n), basis.breakpoints())
    return PiecewiseLinearFn(x, U_TRUE(x))


@pytest.fixture(scope="session")
def basis38():
    return build_multiresolution_basis(Interval(), [11, 23], True)


@pytest.fixture(scope="session")
def system38(basis38):
    return assemble_collage(basis38, None, exact_target(basis38), F_SRC)


@pytest.fixture(scope="session")
def lam_star(basis38):
    # K_true interpolated on the finest level; exact because K_true is linear
    return basis38.interpolant(K_TRUE)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
