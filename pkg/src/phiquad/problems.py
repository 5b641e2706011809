"""Semidiscrete benchmark problems on ``[0, 1]`` with homogeneous Dirichlet data.

All three share the exact solution ``u(x, t) = x (1 - x) e^t`` and a
forcing ``g`` manufactured analytically so that the PDE holds exactly.
Because that solution is quadratic in ``x``, the centered differences and
Simpson's rule reproduce it without spatial error, so measured errors are
pure time-integration errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Problem",
    "laplacian",
    "simpson_weights",
    "simpson_integral",
    "centered_dx",
    "norm_half",
    "norm_max",
    "exact_solution",
    "make_ex1_cp",
    "make_ex1_ho",
    "make_ex2_ho",
    "PROBLEMS",
]


def laplacian(J: int) -> np.ndarray:
    """``J**2 * tridiag(1, -2, 1)`` of size ``(J-1) x (J-1)``."""
    if J < 2:
        raise ValueError(f"J must be >= 2, got {J}")
    n = J - 1
    A = np.zeros((n, n))
    i = np.arange(n)
    A[i, i] = -2.0 * J * J
    A[i[:-1], i[:-1] + 1] = J * J
    A[i[:-1] + 1, i[:-1]] = J * J
    return A


def simpson_weights(J: int) -> np.ndarray:
    """Composite Simpson weights on the grid ``x_0..x_J`` (``J`` even)."""
    if J < 2 or J % 2:
        raise ValueError(f"composite Simpson needs an even J >= 2, got {J}")
    w = np.full(J + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w / (3.0 * J)


def simpson_integral(v_interior, J):
    """Integral over ``[0, 1]`` of an interior vector extended by zero boundary values."""
    return float(simpson_weights(J)[1:-1] @ v_interior)


def centered_dx(v_interior, J):
    """Centered ``u_x`` with zero Dirichlet neighbours."""
    padded = np.concatenate(([0.0], v_interior, [0.0]))
    return (padded[2:] - padded[:-2]) * (J / 2.0)


def norm_half(v, A, J) -> float:
    """Discrete ``||.||_{1/2}``: ``sqrt(v^T (-A) v / J)``."""
    v = np.asarray(v)
    if A.shape != (v.size, v.size):
        raise ValueError("dimension mismatch between v and A")
    return float(np.sqrt(max(v @ (-A @ v), 0.0) / J))


def norm_max(v) -> float:
    v = np.asarray(v)
    return float(np.abs(v).max()) if v.size else 0.0


def exact_solution(x, t):
    return x * (1.0 - x) * np.exp(t)


@dataclass
class Problem:
    """``u' = A u + f(t, u)`` on the interior grid ``x_i = i / J``."""

    name: str
    J: int
    A: np.ndarray
    f: Callable
    forcing: Callable
    exact: Callable = exact_solution
    norm_kind: str = "max"
    T: float = 1.0
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.x = np.arange(1, self.J) / self.J
        if self.norm_kind not in ("max", "half"):
            raise ValueError(f"unknown norm {self.norm_kind!r}")

    def exact_vector(self, t):
        return self.exact(self.x, t)

    def u0(self):
        return self.exact_vector(0.0)

    def norm(self, v):
        if self.norm_kind == "max":
            return norm_max(v)
        return norm_half(v, self.A, self.J)


def _g_ex1_cp(x, t):
    et = np.exp(t)
    return x * (1 - x) * et + 2 * et - (et / 6.0) * (1 - 2 * x) * et


def _g_ex1_ho(x, t):
    u = x * (1 - x) * np.exp(t)
    return u + 2 * np.exp(t) - 1.0 / (1.0 + u * u)


def _g_ex2_ho(x, t):
    et = np.exp(t)
    return x * (1 - x) * et + 2 * et - et / 6.0


def make_ex1_cp(J: int = 512) -> Problem:
    """``u_t = u_xx + (int_0^1 u) u_x + g``, error in the half norm."""
    x = np.arange(1, J) / J
    simpson_weights(J)

    def f(t, u):
        return simpson_integral(u, J) * centered_dx(u, J) + _g_ex1_cp(x, t)

    return Problem("ex1_cp", J, laplacian(J), f, _g_ex1_cp, norm_kind="half")


def make_ex1_ho(J: int = 200) -> Problem:
    """``u_t = u_xx + 1 / (1 + u^2) + g``, error in the max norm."""
    x = np.arange(1, J) / J

    def f(t, u):
        return 1.0 / (1.0 + u * u) + _g_ex1_ho(x, t)

    return Problem("ex1_ho", J, laplacian(J), f, _g_ex1_ho, norm_kind="max")


def make_ex2_ho(J: int = 200) -> Problem:
    """``u_t = u_xx + int_0^1 u + g``, error in the half norm."""
    x = np.arange(1, J) / J
    simpson_weights(J)

    def f(t, u):
        return simpson_integral(u, J) + _g_ex2_ho(x, t)

    return Problem("ex2_ho", J, laplacian(J), f, _g_ex2_ho, norm_kind="half")


PROBLEMS = {"ex1_cp": make_ex1_cp, "ex1_ho": make_ex1_ho, "ex2_ho": make_ex2_ho}
