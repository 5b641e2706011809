"""Explicit exponential multistep and Runge-Kutta integrators for ``u' = A u + f(t, u)``.

Both families work from an :class:`~phiquad.operator_phi.OperatorSet` assembled
once per ``(h, A)``, so a time step costs only matrix-vector products and
evaluations of ``f``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .contour import QuadConfig
from .operator_phi import OperatorSet, precompute_multistep_ops, precompute_rk_ops
from .transforms import PhiSpec

__all__ = [
    "BlowUpError",
    "PhiCombo",
    "ExpRKTableau",
    "builtin_tableaus",
    "forward_difference",
    "MultistepState",
    "multistep_step",
    "multistep_integrate",
    "exprk_step",
    "exprk_integrate",
    "IntegrationResult",
]


class BlowUpError(FloatingPointError):
    """The numerical solution became non-finite."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite solution at step {step}")


def _check_finite(u, step):
    if not np.all(np.isfinite(u)):
        raise BlowUpError(step)


@dataclass(frozen=True)
class PhiCombo:
    """Exact linear combination ``sum coeff * varphi_j(beta h A)``.

    ``terms`` holds ``(coeff, j, beta)`` triples with rational ``coeff`` and
    ``beta``.
    """

    terms: Tuple[Tuple[Fraction, int, Fraction], ...] = ()

    @classmethod
    def of(cls, *terms):
        return cls(tuple((Fraction(c), int(j), Fraction(b)) for c, j, b in terms))

    def __add__(self, other):
        return PhiCombo(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor):
        factor = Fraction(factor)
        return PhiCombo(tuple((factor * c, j, b) for c, j, b in self.terms))

    def simplified(self):
        acc: Dict[Tuple[int, Fraction], Fraction] = {}
        for c, j, b in self.terms:
            acc[(j, b)] = acc.get((j, b), Fraction(0)) + c
        return PhiCombo(tuple((c, j, b) for (j, b), c in acc.items() if c != 0))

    def specs(self):
        return [PhiSpec.rk(j, b) for _, j, b in self.terms]

    def at_zero(self):
        """Value of the combination at ``A = 0`` (``varphi_j(0) = 1/j!``)."""
        return sum((c / math.factorial(j) for c, j, _ in self.terms), Fraction(0))

    def matrix(self, ops: OperatorSet):
        out = None
        for c, j, b in self.terms:
            term = float(c) * ops[PhiSpec.rk(j, b)]
            out = term if out is None else out + term
        return out

    def __bool__(self):
        return bool(self.terms)


@dataclass(frozen=True)
class ExpRKTableau:
    """Explicit exponential Runge-Kutta method.

    ``a`` maps 0-based ``(i, j)`` with ``j < i`` to a :class:`PhiCombo`;
    missing entries are zero.  ``c[0]`` must be 0.
    """

    name: str
    c: Tuple[Fraction, ...]
    a: Dict[Tuple[int, int], PhiCombo]
    b: Tuple[PhiCombo, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(Fraction(x) for x in self.c))
        if self.c[0] != 0:
            raise ValueError("c_1 must be 0")
        if len(self.b) != self.s:
            raise ValueError("b must have one entry per stage")
        betas = {ci for ci in self.c if ci != 0} | {Fraction(1)}
        for (i, j), combo in self.a.items():
            if not 0 <= j < i < self.s:
                raise ValueError(f"a[{i},{j}] is not strictly lower triangular")
        for combo in list(self.a.values()) + list(self.b):
            for _, jj, beta in combo.terms:
                if jj < 1 or beta not in betas:
                    raise ValueError(f"invalid term varphi_{jj}({beta} hA) in {self.name}")

    @property
    def s(self):
        return len(self.c)

    def requested_specs(self):
        """Every mapping the method needs, in request order (with repeats)."""
        out = [PhiSpec.rk(0, ci) for ci in self.c if ci != 0]
        out.append(PhiSpec.rk(0, 1))
        for i in range(self.s):
            for j in range(i):
                if (i, j) in self.a:
                    out.extend(self.a[(i, j)].specs())
        for combo in self.b:
            out.extend(combo.specs())
        return out

    def row_sums_at_zero(self):
        return [sum((self.a[(i, j)].at_zero() for j in range(i) if (i, j) in self.a), Fraction(0))
                for i in range(self.s)]

    def matrices(self, ops: OperatorSet):
        """Combined matrices: stage exponentials, ``a_ij(hA)``, ``b_i(hA)``, ``e^{hA}``."""
        expc = [None if ci == 0 else ops[PhiSpec.rk(0, ci)] for ci in self.c]
        a = {key: combo.matrix(ops) for key, combo in self.a.items() if combo}
        b = [combo.matrix(ops) if combo else None for combo in self.b]
        return expc, a, b, ops[PhiSpec.rk(0, 1)]


def _phi(j, beta=1):
    return PhiCombo.of((1, j, beta))


def builtin_tableaus():
    """Exponential Euler and explicit exponential Runge-Kutta methods of orders 2, 3 and 4."""
    half, third, two3 = Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)
    euler = ExpRKTableau("euler", (0,), {}, (_phi(1),))

    rk2 = ExpRKTableau(
        "rk2",
        (0, half),
        {(1, 0): _phi(1, half).scale(half)},
        (PhiCombo(), _phi(1)),
    )

    rk3 = ExpRKTableau(
        "rk3",
        (0, third, two3),
        {
            (1, 0): _phi(1, third).scale(third),
            (2, 0): _phi(1, two3).scale(two3) - _phi(2, two3).scale(Fraction(4, 3)),
            (2, 1): _phi(2, two3).scale(Fraction(4, 3)),
        },
        (_phi(1) - _phi(2).scale(Fraction(3, 2)), PhiCombo(), _phi(2).scale(Fraction(3, 2))),
    )

    # varphi_{i,j} = varphi_i(c_j hA) with c = (0, 1/2, 1/2, 1, 1/2)
    a52 = (
        _phi(2, half).scale(half)
        - _phi(3, 1)
        + _phi(2, 1).scale(Fraction(1, 4))
        - _phi(3, half).scale(half)
    ).simplified()
    a54 = (_phi(2, half).scale(Fraction(1, 4)) - a52).simplified()
    rk4 = ExpRKTableau(
        "rk4",
        (0, half, half, 1, half),
        {
            (1, 0): _phi(1, half).scale(half),
            (2, 0): _phi(1, half).scale(half) - _phi(2, half),
            (2, 1): _phi(2, half),
            (3, 0): _phi(1, 1) - _phi(2, 1).scale(2),
            (3, 1): _phi(2, 1),
            (3, 2): _phi(2, 1),
            (4, 0): (_phi(1, half).scale(half) - a52.scale(2) - a54).simplified(),
            (4, 1): a52,
            (4, 2): a52,
            (4, 3): a54,
        },
        (
            _phi(1) - _phi(2).scale(3) + _phi(3).scale(4),
            PhiCombo(),
            PhiCombo(),
            _phi(2).scale(-1) + _phi(3).scale(4),
            _phi(2).scale(4) - _phi(3).scale(8),
        ),
    )
    return {"euler": euler, "rk2": rk2, "rk3": rk3, "rk4": rk4}


def forward_difference(history: Sequence, j: int):
    """``Delta^j f_n = sum_i (-1)^(j-i) binom(j, i) f_{n+i}`` from ``history[0] = f_n``."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    if len(history) < j + 1:
        raise ValueError(f"forward difference of order {j} needs {j + 1} values")
    out = None
    for i in range(j + 1):
        term = (-1) ** (j - i) * math.comb(j, i) * np.asarray(history[i])
        out = term if out is None else out + term
    return out


@dataclass
class MultistepState:
    """Sliding window ``u_n..u_{n+k-1}`` and ``f_n..f_{n+k-1}`` of a k-step method."""

    k: int
    h: float
    n: int
    us: deque
    fs: deque

    @classmethod
    def start(cls, k, h, starting_values, f, t0=0.0):
        if len(starting_values) != k:
            raise ValueError(f"a {k}-step method needs {k} starting values")
        us = deque((np.asarray(u, dtype=float) for u in starting_values), maxlen=k)
        fs = deque((np.asarray(f(t0 + i * h, u)) for i, u in enumerate(us)), maxlen=k)
        return cls(k, h, 0, us, fs)

    @property
    def u_current(self):
        return self.us[-1]


def multistep_step(state: MultistepState, ops: OperatorSet, f: Callable, t0=0.0):
    """Advance to ``u_{n+k}`` and slide the window by one."""
    k, h = state.k, state.h
    u_new = ops[PhiSpec.multistep(0, k)] @ state.us[0]
    for j in range(k):
        u_new = u_new + h * (ops[PhiSpec.multistep(j + 1, k)] @ forward_difference(state.fs, j))
    step = state.n + k
    _check_finite(u_new, step)
    f_new = np.asarray(f(t0 + step * h, u_new))
    _check_finite(f_new, step)
    state.us.append(u_new)
    state.fs.append(f_new)
    state.n += 1
    return state


@dataclass
class IntegrationResult:
    u: np.ndarray
    error: Optional[float]
    times: np.ndarray
    trajectory: Optional[np.ndarray] = field(default=None, repr=False)


def _finish(problem, u, times, traj):
    error = None
    if getattr(problem, "exact_vector", None) is not None:
        error = float(problem.norm(u - problem.exact_vector(times[-1])))
    return IntegrationResult(u, error, times, None if traj is None else np.array(traj))


def multistep_integrate(
    problem,
    k: int,
    N: int,
    cfg: QuadConfig = QuadConfig(),
    ops: Optional[OperatorSet] = None,
    starting: str = "exact",
    keep_trajectory: bool = False,
    workers=None,
):
    """Integrate ``problem`` over ``[0, T]`` with ``N`` steps of the k-step method.

    Starting values ``u_1..u_{k-1}`` come from the exact solution
    (``starting="exact"``) or from the order-4 exponential Runge-Kutta method
    at the same step size (``starting="exprk"``).
    """
    if N < k:
        raise ValueError(f"need N >= k, got N={N}, k={k}")
    h = problem.T / N
    if ops is None:
        ops = precompute_multistep_ops(k, problem.A, h, cfg, workers)
    if starting == "exact":
        start = [problem.exact_vector(i * h) for i in range(k)]
    elif starting == "exprk":
        start = [problem.u0()]
        if k > 1:
            tab = builtin_tableaus()["rk4"]
            rk_ops = precompute_rk_ops(tab, problem.A, h, cfg, workers)
            mats = tab.matrices(rk_ops)
            for i in range(1, k):
                start.append(exprk_step(start[-1], tab, rk_ops, problem.f, (i - 1) * h, h, mats))
    else:
        raise ValueError(f"unknown starting-value strategy {starting!r}")
    state = MultistepState.start(k, h, start, problem.f)
    traj = list(start) if keep_trajectory else None
    for _ in range(N - k + 1):
        multistep_step(state, ops, problem.f)
        if traj is not None:
            traj.append(state.u_current)
    times = h * np.arange(N + 1)
    return _finish(problem, state.u_current, times, traj)


def exprk_step(u_n, tableau: ExpRKTableau, ops: OperatorSet, f: Callable, t_n, h, mats=None):
    """One step of an exponential Runge-Kutta method; returns ``u_{n+1}``."""
    expc, a, b, exph = mats if mats is not None else tableau.matrices(ops)
    s = tableau.s
    needed = {j for (_, j) in a} | {i for i in range(s) if b[i] is not None}
    F = [None] * s
    for i in range(s):
        U = u_n if expc[i] is None else expc[i] @ u_n
        for j in range(i):
            if (i, j) in a:
                U = U + h * (a[(i, j)] @ F[j])
        if i in needed:
            F[i] = np.asarray(f(t_n + float(tableau.c[i]) * h, U))
            _check_finite(F[i], i)
    u_new = exph @ u_n
    for i in range(s):
        if b[i] is not None:
            u_new = u_new + h * (b[i] @ F[i])
    return u_new


def exprk_integrate(
    problem,
    tableau: ExpRKTableau,
    N: int,
    cfg: QuadConfig = QuadConfig(),
    ops: Optional[OperatorSet] = None,
    keep_trajectory: bool = False,
    workers=None,
):
    """Integrate ``problem`` over ``[0, T]`` with ``N`` steps of ``tableau``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    h = problem.T / N
    if ops is None:
        ops = precompute_rk_ops(tableau, problem.A, h, cfg, workers)
    mats = tableau.matrices(ops)
    u = problem.u0()
    traj = [u] if keep_trajectory else None
    for n in range(N):
        try:
            u = exprk_step(u, tableau, ops, problem.f, n * h, h, mats)
        except BlowUpError as exc:
            raise BlowUpError(n + 1) from exc
        _check_finite(u, n + 1)
        if traj is not None:
            traj.append(u)
    return _finish(problem, u, h * np.arange(N + 1), traj)
