"""Scalar phi-type mappings by contour quadrature, with reflection for ``Re lam > 0``.

The mappings are

    g_j(m, lam)       = int_0^m exp((m - s) lam) s**(j-1) ds,
    varphi_k(lam)     = g_k(1, lam) / (k-1)!,
    phi_j(k, lam)     = int_0^k exp((k - s) lam) binom(s, j-1) ds.

For ``Re lam <= 0`` they are inverse Laplace transforms evaluated by the
hyperbolic trapezoidal rule.  For ``Re lam > 0`` two routes exist: if ``lam``
is at least the strip half-width ``d`` to the right of the contour the direct
sum plus the residue at ``lam`` is used, otherwise the reflection
``g_j(m, lam) = exp(m lam) * L^{-1}[G*_j(., -lam)](m)``.  The reflected sum
cancels badly once ``m lam`` is large, the direct one loses accuracy near
the contour, so each covers the other's weak spot.  None of these paths
suffers the cancellation of ``(exp(lam) - 1) / lam`` for small ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contour import QuadConfig, QuadratureRule, SectorBound, compensated_sum, encloses, strip_distance
from .transforms import (
    RationalTransform,
    binomial_poly,
    gstar_transform,
    multistep_transform,
    poly_transform,
)

__all__ = [
    "ScalarEvalConfig",
    "NodeCollisionError",
    "phi_quad",
    "g_scalar",
    "phi_rk_scalar",
    "phi_multistep_scalar",
    "oracle_phi",
    "oracle_g",
    "oracle_phi_multistep",
]

_EXP_LIMIT = 700.0


class NodeCollisionError(ArithmeticError):
    """The evaluation point lies (numerically) on a quadrature node."""


@dataclass(frozen=True)
class ScalarEvalConfig(QuadConfig):
    """Quadrature settings for scalar evaluation."""

    K: int = 25
    sector: SectorBound = field(default_factory=SectorBound)
    reflection_threshold: float = 0.0


DEFAULT_CONFIG = ScalarEvalConfig()


def phi_quad(transform: RationalTransform, lam, rule: QuadratureRule):
    """``sum_l w_l exp(m z_l) R(z_l) / (z_l - lam)`` over ``rule``.

    A halved rule is only accepted for real ``lam`` and returns a real value.
    When ``lam`` lies right of the contour the pole was crossed while deforming
    the Bromwich line, so its residue ``exp(m lam) R(lam)`` is added back.
    """
    lam = complex(lam)
    if rule.halved and lam.imag != 0.0:
        raise ValueError("halved rules need a real evaluation point")
    z = rule.nodes
    gap = np.abs(z - lam)
    if gap.min() < 1e-8 * abs(lam):
        raise NodeCollisionError(f"lambda={lam} is within {gap.min():.3g} of a quadrature node")
    terms = rule.weights * np.exp(transform.m * z) * transform(z) / (z - lam)
    if not encloses(rule.params, lam):
        terms = np.append(terms, np.exp(transform.m * lam) * transform(lam))
    total = compensated_sum(terms)
    return float(total.real) if rule.halved else complex(total)


def _rule(cfg, m):
    return cfg.rule(m, halved=False)


def _quad(transform, lam, cfg):
    lam = complex(lam)
    if lam.imag == 0.0:
        return complex(phi_quad(transform, lam.real, cfg.rule(transform.m, halved=True)))
    return phi_quad(transform, lam, _rule(cfg, transform.m))


def _overflow_guard(m, lam):
    if m * lam.real > _EXP_LIMIT:
        raise OverflowError(f"exp(m*lambda) overflows for m={m}, lambda={lam}")


def g_scalar(j: int, m: int, lam, cfg: ScalarEvalConfig = DEFAULT_CONFIG) -> complex:
    """``g_j(m, lam)`` for any complex ``lam`` with ``m Re(lam) <= 700``."""
    if j < 1 or m < 1:
        raise ValueError("need j >= 1 and m >= 1")
    lam = complex(lam)
    direct = poly_transform([0] * (j - 1) + [1], m)
    if lam.real <= cfg.reflection_threshold:
        return _quad(direct, lam, cfg)
    _overflow_guard(m, lam)
    if strip_distance(cfg.rule(m, halved=False).params, lam) >= cfg.d:
        return _quad(direct, lam, cfg)
    return np.exp(m * lam) * _quad(gstar_transform(j, m), -lam, cfg)


def phi_rk_scalar(k: int, lam, cfg: ScalarEvalConfig = DEFAULT_CONFIG) -> complex:
    """``varphi_k(lam) = int_0^1 exp((1 - s) lam) s**(k-1) / (k-1)! ds``; ``varphi_0 = exp``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    lam = complex(lam)
    if k == 0:
        _overflow_guard(1, lam)
        return complex(np.exp(lam))
    return g_scalar(k, 1, lam, cfg) / math.factorial(k - 1)


def phi_multistep_scalar(j: int, k: int, lam, cfg: ScalarEvalConfig = DEFAULT_CONFIG) -> complex:
    """``phi_j(k, lam)`` of the k-step method, ``0 <= j <= k``."""
    transform = multistep_transform(j, k)
    lam = complex(lam)
    if lam.real <= cfg.reflection_threshold:
        return _quad(transform, lam, cfg)
    _overflow_guard(k, lam)
    if j == 0:
        return complex(np.exp(k * lam))
    coeffs = binomial_poly(j - 1)
    return sum(
        (float(c) * g_scalar(i + 1, k, lam, cfg) for i, c in enumerate(coeffs) if c != 0),
        0j,
    )


def oracle_phi(k: int, lam) -> complex:
    """Reference ``varphi_k(lam)`` independent of any quadrature.

    Taylor series ``sum_n lam**n / (n+k)!`` for ``|lam| <= max(1, k/2)``;
    otherwise the upward recursion ``varphi_{i+1} = (varphi_i - 1/i!) / lam``
    seeded by ``exp(lam)``.  Each recursion step amplifies errors by about
    ``i / |lam|``, hence the k-dependent crossover.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    lam = complex(lam)
    if abs(lam) <= max(1.0, k / 2):
        total = 0j
        term = 1.0 / math.factorial(k)
        n = 0
        while True:
            total += term
            n += 1
            term = term * lam / (n + k)
            if abs(term) <= 1e-18 * abs(total) or n > 200:
                break
        return total
    value = complex(np.exp(lam))
    for i in range(k):
        value = (value - 1.0 / math.factorial(i)) / lam
    return value


def oracle_g(j: int, m: int, lam) -> complex:
    """Reference ``g_j(m, lam) = m**j (j-1)! varphi_j(m lam)``."""
    return m**j * math.factorial(j - 1) * oracle_phi(j, m * complex(lam))


def oracle_phi_multistep(j: int, k: int, lam) -> complex:
    """Reference ``phi_j(k, lam)`` assembled from :func:`oracle_g`."""
    lam = complex(lam)
    if j == 0:
        return complex(np.exp(k * lam))
    return sum(
        (float(c) * oracle_g(i + 1, k, lam) for i, c in enumerate(binomial_poly(j - 1)) if c != 0),
        0j,
    )
