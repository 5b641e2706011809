"""Matrix phi-functions ``phi(h A)`` by quadrature over shifted resolvents.

For a real matrix ``A`` and a rational factor ``R``,

    phi(h A) ~= Re sum_{l=0}^{K} w*_l exp(m z_l) R(z_l) (z_l I - h A)^{-1},

using the halved rule.  Nodes depend only on ``m`` and the quadrature
settings, never on ``h`` or ``A``, so every mapping that shares ``m`` (and the
scaling ``beta``) reuses the same resolvents.  Tridiagonal matrices take a
complex Thomas fast path; everything else uses LU with partial pivoting.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from .contour import CompensatedSum, ContourParams, QuadConfig, QuadratureRule
from .scalar_phi import oracle_phi, oracle_phi_multistep
from .transforms import PhiSpec, RationalTransform, multistep_transform, transform_for

__all__ = [
    "SingularShiftError",
    "ImaginaryResidueError",
    "bandwidth",
    "thomas_solve",
    "shifted_solve",
    "assemble_phi",
    "assemble_many",
    "OperatorSet",
    "precompute_multistep_ops",
    "precompute_rk_ops",
    "oracle_operator",
    "laplacian_eigenpairs",
    "read_matrix_file",
    "write_matrix_file",
]

logger = logging.getLogger(__name__)

_PIVOT_FLOOR = 1e-300
_THOMAS_REL_PIVOT = 1e-10
_IMAG_ALARM = 1e-8


class SingularShiftError(np.linalg.LinAlgError):
    """``z I - h A`` is singular or numerically singular at a node."""


class ImaginaryResidueError(ArithmeticError):
    """A full-rule sum that should be real carries a large imaginary part."""


class _SmallPivot(Exception):
    pass


def bandwidth(A):
    """``(lower, upper)`` bandwidths of a dense matrix."""
    A = np.asarray(A)
    rows, cols = np.nonzero(A)
    if rows.size == 0:
        return 0, 0
    diff = cols - rows
    return int(max(0, -diff.min())), int(max(0, diff.max()))


def thomas_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system without pivoting.

    ``lower`` and ``upper`` have length ``n - 1``; ``rhs`` may be a vector or
    an ``n x p`` matrix.  Raises :class:`SingularShiftError` for a vanishing
    pivot.
    """
    diag = np.asarray(diag, dtype=complex)
    n = diag.size
    rhs = np.asarray(rhs)
    vec = rhs.ndim == 1
    d = np.array(rhs.reshape(n, -1), dtype=complex)
    cp = np.empty(max(n - 1, 0), dtype=complex)
    scale = np.abs(diag)
    if n > 1:
        scale[1:] += np.abs(lower)
        scale[:-1] += np.abs(upper)

    piv = diag[0]
    if abs(piv) < _PIVOT_FLOOR:
        raise SingularShiftError("zero pivot in tridiagonal solve")
    if abs(piv) < _THOMAS_REL_PIVOT * scale[0]:
        raise _SmallPivot
    if n > 1:
        cp[0] = upper[0] / piv
    d[0] /= piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(piv) < _PIVOT_FLOOR:
            raise SingularShiftError("zero pivot in tridiagonal solve")
        if abs(piv) < _THOMAS_REL_PIVOT * scale[i]:
            raise _SmallPivot
        if i < n - 1:
            cp[i] = upper[i] / piv
        d[i] = (d[i] - lower[i - 1] * d[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        d[i] -= cp[i] * d[i + 1]
    return d[:, 0] if vec else d


def _dense_solve(M, rhs):
    with warnings.catch_warnings():
        # singularity is reported below as SingularShiftError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    if np.abs(np.diag(lu)).min() < _PIVOT_FLOOR:
        raise SingularShiftError("singular shifted matrix")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def shifted_solve(A, h, z, rhs, band=None):
    """Solve ``(z I - h A) X = rhs`` for real ``A``.

    ``band`` may pass precomputed bandwidths; a ``(1, 1)`` band (or narrower)
    selects the Thomas path, which falls back to dense LU on a small pivot.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    rhs = np.asarray(rhs)
    if rhs.shape[0] != n:
        raise ValueError("rhs does not match A")
    band = bandwidth(A) if band is None else band
    if max(band) <= 1:
        diag = z - h * np.diag(A)
        lower = -h * np.diag(A, -1)
        upper = -h * np.diag(A, 1)
        try:
            return thomas_solve(lower, diag, upper, rhs)
        except (_SmallPivot, SingularShiftError):
            # breakdown of the unpivoted recurrence; pivoted LU decides singularity
            logger.debug("small Thomas pivot at z=%s; falling back to dense LU", z)
    M = -h * A.astype(complex)
    M[np.diag_indices(n)] += z
    return _dense_solve(M, rhs.astype(complex))


def _resolvents(A, h, nodes, band, workers):
    n = A.shape[0]
    eye = np.eye(n)

    def solve(z):
        return shifted_solve(A, h, z, eye, band)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map preserves node order, so the reduction below stays deterministic
            yield from pool.map(solve, nodes)
    else:
        for z in nodes:
            yield solve(z)


def assemble_many(
    transforms: Dict[object, RationalTransform],
    A,
    h,
    rule: QuadratureRule,
    workers: Optional[int] = None,
):
    """Assemble several mappings sharing one rule (hence one ``m``) and one ``h A``.

    Returns a dict with the same keys.  With a full rule the imaginary part of
    every sum is checked and discarded; with a halved rule the real part is
    taken term by term.
    """
    A = np.asarray(A, dtype=float)
    ms = {t.m for t in transforms.values()}
    if len(ms) > 1:
        raise ValueError("all transforms must share the inversion point m")
    if ms and abs(ms.pop() - rule.params.t0) > 1e-12 * rule.params.t0:
        raise ValueError("rule was not built for this inversion point")
    band = bandwidth(A)
    z = rule.nodes
    coeffs = {
        key: rule.weights * np.exp(t.m * z) * t(z) for key, t in transforms.items()
    }
    acc = {key: CompensatedSum() for key in transforms}
    for ell, res in enumerate(_resolvents(A, h, z, band, workers)):
        for key, c in coeffs.items():
            if rule.halved:
                acc[key].add(c[ell].real * res.real - c[ell].imag * res.imag)
            else:
                acc[key].add(c[ell] * res)
    out = {}
    for key, a in acc.items():
        value = a.value
        if not rule.halved:
            norm = np.abs(value.real).max()
            residue = np.abs(value.imag).max()
            if residue > _IMAG_ALARM * max(norm, 1e-300):
                raise ImaginaryResidueError(
                    f"imaginary residue {residue:.3g} vs result norm {norm:.3g}"
                )
            value = value.real
        out[key] = value
    return out


def assemble_phi(transform: RationalTransform, A, h, rule: QuadratureRule, workers=None):
    """Real matrix approximating the inverse transform of ``R(z) (z I - h A)^{-1}`` at ``m``."""
    return assemble_many({0: transform}, A, h, rule, workers)[0]


@dataclass
class OperatorSet:
    """Precomputed matrices keyed by :class:`PhiSpec`, all for one ``(h, A)``."""

    ops: Dict[PhiSpec, np.ndarray]
    h: float
    K: int
    rule_params: ContourParams
    requests: int = 0
    cache_hits: int = 0

    def __getitem__(self, spec):
        return self.ops[spec]

    def __contains__(self, spec):
        return spec in self.ops

    def __len__(self):
        return len(self.ops)

    @property
    def n(self):
        return next(iter(self.ops.values())).shape[0]


def precompute_multistep_ops(k, A, h, cfg: QuadConfig = QuadConfig(), workers=None) -> OperatorSet:
    """``phi_j(k, h A)`` for ``j = 0..k`` from one shared set of resolvents."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rule = cfg.rule(k, halved=True)
    specs = {PhiSpec.multistep(j, k): multistep_transform(j, k) for j in range(k + 1)}
    ops = assemble_many(specs, A, h, rule, workers)
    return OperatorSet(ops, h, cfg.K, rule.params, requests=len(specs))


def precompute_rk_ops(tableau, A, h, cfg: QuadConfig = QuadConfig(), workers=None) -> OperatorSet:
    """Every ``varphi_j(beta h A)`` an exponential Runge-Kutta tableau references.

    ``tableau.requested_specs()`` lists the requests (duplicates allowed);
    each distinct spec is assembled once.  Specs sharing ``beta`` share
    resolvents.
    """
    requested = list(tableau.requested_specs())
    distinct = list(dict.fromkeys(requested))
    rule = cfg.rule(1, halved=True)
    A = np.asarray(A, dtype=float)
    ops = {}
    for beta in sorted({s.beta for s in distinct}):
        group = {s: transform_for(s) for s in distinct if s.beta == beta}
        ops.update(assemble_many(group, A, float(beta) * h, rule, workers))
    ops = {s: ops[s] for s in distinct}
    return OperatorSet(
        ops,
        h,
        cfg.K,
        rule.params,
        requests=len(requested),
        cache_hits=len(requested) - len(distinct),
    )


def laplacian_eigenpairs(n, diag, off):
    """Eigenpairs of the symmetric Toeplitz tridiagonal matrix ``tridiag(off, diag, off)``."""
    m = np.arange(1, n + 1)
    vals = diag + 2 * off * np.cos(m * np.pi / (n + 1))
    i = np.arange(1, n + 1)
    vecs = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(i, m) * np.pi / (n + 1))
    return vals, vecs


def _is_toeplitz_tridiagonal(A):
    n = A.shape[0]
    if n < 2 or max(bandwidth(A)) > 1:
        return False
    d, off = np.diag(A), np.diag(A, 1)
    return bool(np.all(d == d[0]) and np.all(off == off[0]))


def oracle_operator(spec: PhiSpec, A, h):
    """Reference ``phi(beta h A)`` for symmetric ``A`` via eigen-decomposition.

    Constant-coefficient tridiagonal matrices use the closed-form sine basis;
    other symmetric matrices use a dense symmetric eigensolver.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T, rtol=0, atol=0):
        raise ValueError("oracle_operator needs a symmetric matrix")
    if _is_toeplitz_tridiagonal(A):
        vals, vecs = laplacian_eigenpairs(A.shape[0], A[0, 0], A[0, 1])
    else:
        vals, vecs = np.linalg.eigh(A)
    scaled = float(spec.beta) * h * vals
    if spec.kind == "rk":
        f = [oracle_phi(spec.j, lam).real for lam in scaled]
    elif spec.kind == "multistep":
        f = [oracle_phi_multistep(spec.j, spec.k, lam).real for lam in scaled]
    else:
        f = [_oracle_generic(spec.poly, spec.m, lam) for lam in scaled]
    return (vecs * np.asarray(f)) @ vecs.T


def _oracle_generic(poly, m, lam):
    # int_0^m exp((m-s) lam) s^i ds = i! m^{i+1} varphi_{i+1}(m lam)
    return sum(
        float(c) * math.factorial(i) * m ** (i + 1) * oracle_phi(i + 1, m * lam).real
        for i, c in enumerate(poly)
        if c != 0
    )


def read_matrix_file(path):
    """Read a real matrix: first line ``n``, then ``i j value`` triples (1-based)."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 1:
        raise ValueError(f"{path}: first line must hold the dimension n")
    n = int(lines[0][0])
    if n < 1:
        raise ValueError(f"{path}: dimension must be positive")
    A = np.zeros((n, n))
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'i j value'")
        i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"{path}:{lineno}: index ({i}, {j}) out of range")
        if not math.isfinite(v):
            raise ValueError(f"{path}:{lineno}: non-finite entry")
        A[i - 1, j - 1] = v
    return A


def write_matrix_file(path, A):
    A = np.asarray(A, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]}\n")
        for i, j in zip(*np.nonzero(A)):
            fh.write(f"{i + 1} {j + 1} {float(A[i, j])!r}\n")
