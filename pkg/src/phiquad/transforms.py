"""Rational factors ``R(z)`` turning phi-type mappings into Laplace inversions.

Each mapping ``phi(lam) = int_0^m exp((m - s) lam) p(s) ds`` with polynomial
``p`` is the inverse Laplace transform at ``s = m`` of ``R(z) / (z - lam)``,
where ``R = L[p]``.  Coefficients are derived in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "RationalTransform",
    "PhiSpec",
    "binomial_poly",
    "poly_transform",
    "multistep_transform",
    "rk_transform",
    "gstar_transform",
    "transform_for",
]


@dataclass(frozen=True)
class RationalTransform:
    """``R(z) = numer(z) / z**denom_power`` to be inverted at ``s = m``.

    ``numer`` holds exact ascending-power coefficients.
    """

    numer: Tuple[Fraction, ...]
    denom_power: int
    m: int

    def __post_init__(self):
        numer = tuple(Fraction(c) for c in self.numer)
        while len(numer) > 1 and numer[-1] == 0:
            numer = numer[:-1]
        object.__setattr__(self, "numer", numer or (Fraction(0),))
        if self.denom_power < 0:
            raise ValueError("denom_power must be nonnegative")
        if self.m < 1:
            raise ValueError(f"inversion point m must be >= 1, got {self.m}")
        if self.degree > self.denom_power:
            raise ValueError("R(z) must be proper: deg(numer) <= denom_power")

    @property
    def degree(self):
        return len(self.numer) - 1

    @property
    def coefficients(self):
        return np.array([float(c) for c in self.numer])

    def __call__(self, z):
        z = np.asarray(z)
        # Horner in ascending storage order
        acc = np.zeros_like(z, dtype=np.result_type(z, float))
        for c in reversed(self.numer):
            acc = acc * z + float(c)
        return acc / z**self.denom_power


def binomial_poly(n: int):
    """Exact ascending coefficients of ``binom(s, n) = s (s-1) ... (s-n+1) / n!``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    coeffs = [Fraction(1)]
    for r in range(n):
        # multiply by (s - r)
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= r * c
        coeffs = nxt
    fact = math.factorial(n)
    return tuple(c / fact for c in coeffs)


def poly_transform(p: Sequence, m: int) -> RationalTransform:
    """Laplace transform of the polynomial ``p(s) = sum p[i] s**i``, inverted at ``s = m``.

    Uses ``L[s**i] = i! / z**(i+1)``.
    """
    p = [Fraction(c) for c in p]
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    q = len(p)
    # sum_i p_i i! z^{q-1-i} / z^q
    numer = [Fraction(0)] * q
    for i, c in enumerate(p):
        numer[q - 1 - i] = c * math.factorial(i)
    return RationalTransform(tuple(numer), q, m)


def multistep_transform(j: int, k: int) -> RationalTransform:
    """Factor for ``phi_j(k, .)`` of the k-step method, ``0 <= j <= k``."""
    if not 0 <= j <= k:
        raise ValueError(f"need 0 <= j <= k, got j={j}, k={k}")
    if j == 0:
        return RationalTransform((Fraction(1),), 0, k)
    return poly_transform(binomial_poly(j - 1), k)


def rk_transform(j: int) -> RationalTransform:
    """Factor ``1 / z**j`` for the Runge-Kutta ``phi_j``, inverted at ``s = 1``."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    return RationalTransform((Fraction(1),), j, 1)


def gstar_transform(j: int, m: int, printed_factorial: bool = False) -> RationalTransform:
    """Factor of the reflected transform used for ``g_j(m, lam)`` when ``Re lam > 0``.

    Its inverse at ``s = m`` equals
    ``sum_l binom(j-1, l-1) (-1)**(l-1) m**(j-l) g_l(m, lam)``.
    With ``printed_factorial=True`` the coefficient ``l!`` replaces the correct
    ``(l-1)!``; kept only for comparison.
    """
    if j < 1 or m < 1:
        raise ValueError("need j >= 1 and m >= 1")
    numer = [Fraction(0)] * j
    for ell in range(1, j + 1):
        fact = math.factorial(ell if printed_factorial else ell - 1)
        numer[j - ell] = Fraction(math.comb(j - 1, ell - 1) * fact * (-1) ** (ell - 1) * m ** (j - ell))
    return RationalTransform(tuple(numer), j, m)


@dataclass(frozen=True)
class PhiSpec:
    """Identifies one mapping to evaluate at ``beta * h * A``.

    kind is ``"multistep"`` (``phi_j(k, .)``), ``"rk"`` (``varphi_j``) or
    ``"generic"`` (polynomial kernel ``poly`` inverted at ``m``).
    """

    kind: str
    j: int = 0
    k: Optional[int] = None
    beta: Fraction = Fraction(1)
    poly: Optional[Tuple[Fraction, ...]] = None
    m: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "beta", Fraction(self.beta))
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.kind == "multistep":
            if self.k is None or not 0 <= self.j <= self.k or self.k < 1:
                raise ValueError("multistep spec needs 0 <= j <= k, k >= 1")
        elif self.kind == "rk":
            if self.j < 0:
                raise ValueError("rk spec needs j >= 0")
        elif self.kind == "generic":
            if self.poly is None or self.m is None or self.m < 1:
                raise ValueError("generic spec needs a polynomial and m >= 1")
            object.__setattr__(self, "poly", tuple(Fraction(c) for c in self.poly))
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def multistep(cls, j, k):
        return cls("multistep", j=j, k=k)

    @classmethod
    def rk(cls, j, beta=1):
        return cls("rk", j=j, beta=Fraction(beta))

    @classmethod
    def generic(cls, poly, m, beta=1):
        return cls("generic", poly=tuple(poly), m=m, beta=Fraction(beta))


def transform_for(spec: PhiSpec) -> RationalTransform:
    if spec.kind == "multistep":
        return multistep_transform(spec.j, spec.k)
    if spec.kind == "rk":
        return rk_transform(spec.j)
    return poly_transform(spec.poly, spec.m)
