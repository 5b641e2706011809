import math

import mpmath
import numpy as np
import pytest

mpmath.mp.dps = 40


def mp_g(j, m, lam):
    """High-precision quadrature of int_0^m exp((m - s) lam) s^(j-1) ds."""
    lam = mpmath.mpc(lam)
    return complex(mpmath.quad(lambda s: mpmath.exp((m - s) * lam) * s ** (j - 1), [0, m]))


def mp_phi_multistep(j, k, lam):
    lam = mpmath.mpc(lam)
    if j == 0:
        return complex(mpmath.exp(k * lam))
    return complex(
        mpmath.quad(lambda s: mpmath.exp((k - s) * lam) * mpmath.binomial(s, j - 1), [0, k])
    )


def mp_phi_rk(k, lam):
    if k == 0:
        return complex(mpmath.exp(mpmath.mpc(lam)))
    return mp_g(k, 1, lam) / math.factorial(k - 1)


def dense_laplacian(J):
    n = J - 1
    return J * J * (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
