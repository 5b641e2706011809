"""Hyperbolic contours and trapezoidal rules for inverting sectorial Laplace transforms.

A transform ``F`` analytic in ``|arg(z - gamma)| < pi - delta`` is inverted by
parameterizing the Bromwich integral along the left branch of the hyperbola

    T(x) = mu * (1 - sin(alpha + i x)) + gamma,

and applying the truncated trapezoidal rule with step ``tau`` and ``2K + 1``
nodes.  Two parameter strategies are provided: :func:`select_params_basic`
(error like ``exp(-c K / ln K)``) and :func:`select_params_eps`, which trades
off the evaluation precision ``eps`` against truncation to reach
``exp(-c K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SectorBound",
    "ContourParams",
    "QuadratureRule",
    "QuadConfig",
    "hyperbola_point",
    "hyperbola_derivative",
    "encloses",
    "strip_distance",
    "encloses",
    "select_params_basic",
    "select_params_eps",
    "theta_objective",
    "build_rule",
    "invert",
    "error_bound",
    "compensated_sum",
    "CompensatedSum",
    "DEFAULT_ALPHA",
    "DEFAULT_D",
    "UNIT_ROUNDOFF",
]

DEFAULT_ALPHA = 0.7
DEFAULT_D = 0.6
UNIT_ROUNDOFF = 2.2204e-16


@dataclass(frozen=True)
class SectorBound:
    """Constants of the bound ``||F(z)|| <= M / |z - gamma|**nu`` on a sector.

    The sector is ``|arg(z - gamma)| < pi - delta``.
    """

    gamma: float = 0.0
    delta: float = 0.0
    M: float = 1.0
    nu: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.delta < math.pi / 2:
            raise ValueError(f"delta must lie in [0, pi/2), got {self.delta}")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        if not self.nu >= 1:
            raise ValueError(f"nu must be >= 1, got {self.nu}")


def _check_angles(alpha, d, delta=0.0):
    if not (0.0 < alpha - d and alpha + d < math.pi / 2 - delta):
        raise ValueError(
            f"angles must satisfy 0 < alpha - d < alpha + d < pi/2 - delta; "
            f"got alpha={alpha}, d={d}, delta={delta}"
        )


@dataclass(frozen=True)
class ContourParams:
    """Parameters of one hyperbolic contour and its truncated trapezoidal rule."""

    alpha: float
    d: float
    mu: float
    tau: float
    t0: float
    Lambda: float
    gamma: float
    K: int
    theta_star: Optional[float] = None

    def __post_init__(self):
        _check_angles(self.alpha, self.d)
        if not (self.mu > 0 and self.tau > 0 and self.t0 > 0):
            raise ValueError("mu, tau and t0 must be positive")
        if self.Lambda < 1:
            raise ValueError(f"Lambda must be >= 1, got {self.Lambda}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")


def hyperbola_point(params: ContourParams, x):
    """Point ``T(x)`` on the contour (``x`` may be an array)."""
    return params.mu * (1.0 - np.sin(params.alpha + 1j * np.asarray(x))) + params.gamma


def hyperbola_derivative(params: ContourParams, x):
    """Derivative ``T'(x) = -i mu cos(alpha + i x)``."""
    return -1j * params.mu * np.cos(params.alpha + 1j * np.asarray(x))


def encloses(params: ContourParams, z) -> bool:
    """Whether ``z`` lies strictly left of the contour (inside the deformed region)."""
    z = complex(z)
    x = np.arcsinh(-z.imag / (params.mu * np.cos(params.alpha)))
    edge = params.mu * (1.0 - np.sin(params.alpha) * np.cosh(x)) + params.gamma
    return bool(z.real < edge)


def strip_distance(params: ContourParams, z) -> float:
    """Signed offset of ``z`` from the contour in the strip variable.

    ``z = T(x + i y)`` for some real ``x``; the value is ``y``, positive to the
    right of the contour.  The trapezoidal rule converges at the designed rate
    while ``|y| >= d`` for any pole of the integrand.
    """
    w = np.arcsin(1.0 - (complex(z) - params.gamma) / params.mu)
    return float(params.alpha - w.real)


def select_params_basic(K, alpha=DEFAULT_ALPHA, d=DEFAULT_D, t0=1.0, Lambda=1.0, gamma=0.0):
    """Step and scale giving an ``O(exp(-c K / ln K))`` error uniformly on ``[t0, Lambda t0]``.

    ``tau = a / K`` and ``mu = 2 pi d / (Lambda t0 a)`` with
    ``a = arccosh(Lambda K / sin(alpha))``.
    """
    _check_angles(alpha, d)
    if K < 1 or Lambda < 1 or t0 <= 0:
        raise ValueError("need K >= 1, Lambda >= 1 and t0 > 0")
    arg = Lambda * K / math.sin(alpha)
    if arg <= 1.0:
        raise ValueError(f"arccosh argument {arg} must exceed 1")
    a = math.acosh(arg)
    return ContourParams(
        alpha=alpha,
        d=d,
        mu=2 * math.pi * d / (Lambda * t0 * a),
        tau=a / K,
        t0=t0,
        Lambda=Lambda,
        gamma=gamma,
        K=int(K),
    )


def _a_theta(theta, alpha, Lambda):
    return math.acosh(Lambda / ((1.0 - theta) * math.sin(alpha)))


def theta_objective(theta, K, alpha=DEFAULT_ALPHA, d=DEFAULT_D, Lambda=1.0, eps=UNIT_ROUNDOFF):
    """Leading part of the error bound as a function of the splitting ``theta``."""
    a = _a_theta(theta, alpha, Lambda)
    c = 2 * math.pi * d * K / a
    return eps * math.exp(c * (1.0 - theta)) + math.exp(-c * theta)


def _golden_min(fun, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = fun(x2)
    return 0.5 * (lo + hi)


def select_params_eps(
    K, alpha=DEFAULT_ALPHA, d=DEFAULT_D, t0=1.0, Lambda=1.0, gamma=0.0, eps=UNIT_ROUNDOFF
):
    """Precision-aware parameters reaching an ``O(exp(-c K))`` error down to the ``eps`` floor.

    The splitting ``theta*`` minimizes :func:`theta_objective` over ``(0, 1)``;
    the minimizer is located on the grid ``0.001, ..., 0.999`` and refined by
    golden-section search to ``1e-6``.
    """
    _check_angles(alpha, d)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if K < 1 or Lambda < 1 or t0 <= 0:
        raise ValueError("need K >= 1, Lambda >= 1 and t0 > 0")

    def fun(theta):
        return theta_objective(theta, K, alpha, d, Lambda, eps)

    grid = np.arange(1, 1000) / 1000.0
    values = [fun(th) for th in grid]
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)] if i > 0 else 1e-9
    hi = grid[i + 1] if i + 1 < len(grid) else 1.0 - 1e-9
    theta = _golden_min(fun, lo, hi, 1e-6)
    if fun(theta) > values[i]:
        theta = float(grid[i])

    a = _a_theta(theta, alpha, Lambda)
    return ContourParams(
        alpha=alpha,
        d=d,
        mu=2 * math.pi * d * K * (1.0 - theta) / (Lambda * t0 * a),
        tau=a / K,
        t0=t0,
        Lambda=Lambda,
        gamma=gamma,
        K=int(K),
        theta_star=float(theta),
    )


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of the truncated trapezoidal rule on a hyperbola.

    The full rule stores indices ``-K..K``.  A halved rule stores ``0..K``
    with the weights for ``l >= 1`` doubled; sums over it must take the real
    part, which is valid for transforms with ``F(conj z) = conj F(z)``.
    """

    params: ContourParams
    nodes: np.ndarray
    weights: np.ndarray
    halved: bool

    @property
    def K(self):
        return self.params.K

    def __len__(self):
        return len(self.nodes)


def build_rule(params: ContourParams, halved: bool = False) -> QuadratureRule:
    K = params.K
    ell = np.arange(0 if halved else -K, K + 1)
    x = ell * params.tau
    nodes = hyperbola_point(params, x)
    weights = params.tau * params.mu / (2 * math.pi) * np.cos(params.alpha + 1j * x)
    # the l = 0 node and weight are real up to sin/cos of a real argument
    mid = 0 if halved else K
    nodes[mid] = nodes[mid].real
    weights[mid] = weights[mid].real
    if halved:
        weights[1:] *= 2.0
    else:
        # enforce exact conjugate symmetry
        nodes[:K] = np.conj(nodes[: K : -1])
        weights[:K] = np.conj(weights[: K : -1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(params=params, nodes=nodes, weights=weights, halved=halved)


class CompensatedSum:
    """Running Neumaier-compensated sum of real or complex scalars/arrays.

    Real and imaginary parts are compensated independently.  Terms are added
    in call order, so the result does not depend on how they were produced.
    """

    def __init__(self):
        self._parts = None

    @staticmethod
    def _step(total, comp, term):
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
        return t

    def add(self, term):
        term = np.asarray(term)
        pieces = (term.real, term.imag)
        if self._parts is None:
            self._parts = [[np.array(p, dtype=float), np.zeros(np.shape(p))] for p in pieces]
            self._complex = np.iscomplexobj(term)
            return
        self._complex |= np.iscomplexobj(term)
        for part, piece in zip(self._parts, pieces):
            part[0] = self._step(part[0], part[1], piece)

    def add_real(self, term):
        """Add only the real part of ``term`` (for sums that are real by symmetry)."""
        self.add(np.real(term))

    @property
    def value(self):
        if self._parts is None:
            return 0.0
        re = self._parts[0][0] + self._parts[0][1]
        out = re + 1j * (self._parts[1][0] + self._parts[1][1]) if self._complex else re
        return out[()] if np.ndim(out) == 0 else out


def compensated_sum(terms):
    """Neumaier-compensated sum of scalars or equal-shape arrays, in the given order."""
    acc = CompensatedSum()
    for term in terms:
        acc.add(term)
    return acc.value


def invert(F: Callable, t: float, rule: QuadratureRule):
    """Approximate the inverse Laplace transform ``f(t)`` of ``F``.

    ``F`` is called once on the array of nodes and must return an array of the
    same shape.  For a halved rule the real part of the sum is returned.
    """
    values = F(rule.nodes)
    terms = rule.weights * np.exp(t * rule.nodes) * values
    total = compensated_sum(terms)
    return total.real if rule.halved else total


def _L(x):
    return 1.0 - math.log(1.0 - math.exp(-x))


def error_bound(
    K,
    alpha=DEFAULT_ALPHA,
    d=DEFAULT_D,
    t=1.0,
    eps=UNIT_ROUNDOFF,
    sector: Optional[SectorBound] = None,
    t0=1.0,
    Lambda=1.0,
):
    """Computable bound on the inversion error at ``t`` for the basic parameter choice."""
    sector = sector or SectorBound()
    _check_angles(alpha, d, sector.delta)
    if not t0 * (1 - 1e-14) <= t <= Lambda * t0 * (1 + 1e-14):
        raise ValueError(f"t={t} outside the window [{t0}, {Lambda * t0}]")
    params = select_params_basic(K, alpha, d, t0, Lambda, sector.gamma)
    a = math.acosh(Lambda * K / math.sin(alpha))
    nu = sector.nu
    s = math.sin(alpha + d)
    Pi = math.sqrt((1 + s) / (1 - s) ** (2 * nu - 1)) / math.pi
    Q = max(
        4 * _L(params.mu * t0 * math.sin(alpha - d)),
        params.tau + _L(params.mu * t0 * math.sin(alpha)),
    )
    decay = math.exp(-2 * math.pi * d * K / a)
    return (
        sector.M
        * Pi
        * Q
        * math.exp(2 * math.pi * d / a)
        * t ** (nu - 1)
        * (eps + decay / (1 - decay))
    )


@lru_cache(maxsize=256)
def _cached_rule(t0, K, alpha, d, eps, gamma, halved):
    if eps is None:
        params = select_params_basic(K, alpha, d, t0, 1.0, gamma)
    else:
        params = select_params_eps(K, alpha, d, t0, 1.0, gamma, eps)
    return build_rule(params, halved)


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature settings for single-point inversion (``Lambda = 1``).

    ``eps`` in ``(0, 1)`` selects the precision-aware parameters (the default,
    at binary64 unit round-off); ``eps=None`` selects the basic ones.  For
    factors with a high-order pole at the origin, such as ``phi_4(4, .)``, the
    basic nodes pass close to that pole and round-off is amplified by
    ``|R(z)|``, so the precision-aware choice is the safer default.
    """

    K: int = 35
    alpha: float = DEFAULT_ALPHA
    d: float = DEFAULT_D
    eps: Optional[float] = UNIT_ROUNDOFF
    gamma: float = 0.0

    def __post_init__(self):
        _check_angles(self.alpha, self.d)
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.eps is not None and not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")

    def rule(self, t0, halved=False) -> QuadratureRule:
        return _cached_rule(float(t0), int(self.K), self.alpha, self.d, self.eps, self.gamma, halved)
