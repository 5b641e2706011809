import math

import numpy as np
import pytest

from phiquad.problems import (
    PROBLEMS,
    Problem,
    centered_dx,
    exact_solution,
    laplacian,
    make_ex1_cp,
    norm_half,
    norm_max,
    simpson_integral,
    simpson_weights,
)


def test_laplacian_small():
    np.testing.assert_array_equal(laplacian(2), [[-8.0]])
    expected = 16 * np.array([[-2, 1, 0], [1, -2, 1], [0, 1, -2]], dtype=float)
    np.testing.assert_array_equal(laplacian(4), expected)
    with pytest.raises(ValueError):
        laplacian(1)


@pytest.mark.parametrize("J", [4, 8, 200])
def test_laplacian_eigenvalues(J):
    m = np.arange(1, J)
    expected = np.sort(-4 * J * J * np.sin(m * np.pi / (2 * J)) ** 2)
    np.testing.assert_allclose(np.linalg.eigvalsh(laplacian(J)), expected, rtol=1e-10)


def test_simpson():
    w = simpson_weights(4)
    np.testing.assert_allclose(w, np.array([1, 4, 2, 4, 1]) / 12)
    x = np.arange(1, 8) / 8
    # exact for cubics; boundary values are zero for x(1-x)
    assert simpson_integral(x * (1 - x), 8) == pytest.approx(1 / 6, rel=1e-15)
    with pytest.raises(ValueError):
        simpson_weights(5)


def test_centered_dx_exact_on_quadratic():
    J = 16
    x = np.arange(1, J) / J
    np.testing.assert_allclose(centered_dx(x * (1 - x), J), 1 - 2 * x, atol=1e-14)


def test_laplacian_exact_on_quadratic():
    J = 32
    x = np.arange(1, J) / J
    np.testing.assert_allclose(laplacian(J) @ (x * (1 - x)), -2 * np.ones(J - 1), rtol=1e-12)


@pytest.mark.parametrize("name,J", [("ex1_cp", 64), ("ex1_ho", 50), ("ex2_ho", 50)])
@pytest.mark.parametrize("t", [0.0, 0.37, 1.0])
def test_forcing_makes_residual_vanish(name, J, t):
    prob = PROBLEMS[name](J=J)
    u = prob.exact_vector(t)
    # u_t = u for the exact solution
    residual = u - prob.A @ u - prob.f(t, u)
    assert np.abs(residual).max() <= 1e-11 * (1 + np.abs(prob.A @ u).max())


def test_norms():
    J = 8
    A = laplacian(J)
    v = np.sin(np.pi * np.arange(1, J) / J)
    lam = 4 * J * J * math.sin(math.pi / (2 * J)) ** 2
    assert norm_half(v, A, J) == pytest.approx(math.sqrt(lam * (v @ v) / J), rel=1e-13)
    assert norm_max(-3 * v) == pytest.approx(3.0, rel=1e-15)
    assert norm_half(np.zeros(J - 1), A, J) == 0.0
    with pytest.raises(ValueError):
        norm_half(np.ones(3), A, J)


def test_problem_defaults():
    assert make_ex1_cp().J == 512 and make_ex1_cp().norm_kind == "half"
    assert PROBLEMS["ex1_ho"]().J == 200 and PROBLEMS["ex1_ho"]().norm_kind == "max"
    assert PROBLEMS["ex2_ho"]().norm_kind == "half"
    p = PROBLEMS["ex2_ho"](J=10)
    np.testing.assert_array_equal(p.u0(), exact_solution(p.x, 0.0))
    with pytest.raises(ValueError):
        Problem("x", 4, laplacian(4), None, None, norm_kind="l2")
