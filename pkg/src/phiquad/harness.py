"""Benchmark driver: the scalar accuracy table, convergence ladders and operator assembly.

Run ``python -m phiquad --help`` for the command line.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .contour import DEFAULT_ALPHA, DEFAULT_D, UNIT_ROUNDOFF, QuadConfig
from .integrators import builtin_tableaus, exprk_integrate, multistep_integrate
from .operator_phi import (
    bandwidth,
    oracle_operator,
    precompute_multistep_ops,
    precompute_rk_ops,
    read_matrix_file,
)
from .problems import PROBLEMS
from .scalar_phi import ScalarEvalConfig, oracle_phi, phi_rk_scalar

__all__ = [
    "RunConfig",
    "ConvergenceRecord",
    "ConvergenceResult",
    "TABLE1_LAMBDAS",
    "METHODS",
    "VALID_PAIRS",
    "cmd_table1",
    "cmd_convergence",
    "cmd_assemble",
    "fit_order",
    "estimate_floor",
    "main",
]

logger = logging.getLogger(__name__)

TABLE1_LAMBDAS = tuple(-(10.0**-p) for p in range(14)) + tuple(10.0**-p for p in range(14))
METHODS = ("ms1", "ms2", "ms3", "ms4", "euler", "rk2", "rk3", "rk4")
VALID_PAIRS = {
    "ex1_cp": ("ms1", "ms2", "ms3", "ms4"),
    "ex1_ho": ("euler", "rk2", "rk3", "rk4"),
    "ex2_ho": ("euler", "rk2", "rk3"),
}
DEFAULT_LADDER = tuple(2**p for p in range(2, 11))
DEFAULT_J = {"ex1_cp": 512, "ex1_ho": 200, "ex2_ho": 200}
CSV_HEADER = ("problem", "method", "J", "K", "h", "error", "norm")


def _fmt(x):
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    command: str = "convergence"
    problem: str = "ex1_cp"
    method: str = "ms4"
    J: Optional[int] = None
    K: int = 35
    alpha: float = DEFAULT_ALPHA
    d: float = DEFAULT_D
    eps: Optional[float] = UNIT_ROUNDOFF
    N_list: Sequence[int] = DEFAULT_LADDER
    out: Optional[str] = None
    # unused: every run is deterministic
    seed: Optional[int] = None

    def __post_init__(self):
        if self.J is None:
            self.J = DEFAULT_J.get(self.problem, 200)
        if self.problem not in VALID_PAIRS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.method not in VALID_PAIRS[self.problem]:
            raise ValueError(
                f"method {self.method!r} is not run on {self.problem}; "
                f"choose from {VALID_PAIRS[self.problem]}"
            )
        if self.J < 2 or self.J % 2:
            raise ValueError("J must be even and >= 2")
        if any(int(N) < 1 for N in self.N_list):
            raise ValueError("step counts must be positive")
        self.N_list = tuple(sorted(int(N) for N in self.N_list))
        # validates K, angles and eps
        self.quad_config()

    def quad_config(self):
        return QuadConfig(K=self.K, alpha=self.alpha, d=self.d, eps=self.eps)


@dataclass(frozen=True)
class ConvergenceRecord:
    problem: str
    method: str
    J: int
    K: int
    h: float
    error: float
    norm: str

    def __post_init__(self):
        if not (math.isfinite(self.error) and self.error >= 0):
            raise ValueError(f"invalid error value {self.error}")

    def row(self):
        return (self.problem, self.method, str(self.J), str(self.K), _fmt(self.h), _fmt(self.error), self.norm)


@dataclass
class ConvergenceResult:
    records: List[ConvergenceRecord]
    order: Optional[float]
    failures: List[tuple] = field(default_factory=list)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.records:
            writer.writerow(rec.row())
        if self.order is not None:
            buf.write(f"# fitted_order={_fmt(self.order)}\n")
        for N, msg in self.failures:
            buf.write(f"# failed N={N}: {msg}\n")
        return buf.getvalue()


def estimate_floor(hs, errors):
    """Error level of a trailing plateau, or 0 when the finest points still converge.

    A trailing segment is flat when its local slope is below half the median
    slope of the preceding segments.
    """
    order = np.argsort(hs)[::-1]
    h = np.asarray(hs, dtype=float)[order]
    e = np.asarray(errors, dtype=float)[order]
    if len(h) < 3:
        return 0.0
    slopes = np.diff(np.log(e)) / np.diff(np.log(h))
    ref = np.median(slopes[: max(1, len(slopes) // 2)])
    if slopes[-1] < 0.5 * ref:
        return float(e[-1])
    return 0.0


def fit_order(records, floor=None, upper=1e-1):
    """Least-squares slope of ``log(error)`` against ``log(h)``.

    Only errors in ``[100 * floor, upper]`` are used; the floor defaults to
    :func:`estimate_floor`.  Raises ``ValueError`` with fewer than 3 usable
    points.
    """
    hs = np.array([r.h for r in records], dtype=float)
    es = np.array([r.error for r in records], dtype=float)
    if floor is None:
        floor = estimate_floor(hs, es) if len(hs) else 0.0
    keep = (es <= upper) & (es >= 100.0 * floor) & (es > 0)
    if keep.sum() < 3:
        raise ValueError(f"only {int(keep.sum())} usable points above the floor {floor:.3g}")
    slope, _ = np.polyfit(np.log(hs[keep]), np.log(es[keep]), 1)
    return float(slope)


def _run_one(problem, method, N, cfg: QuadConfig):
    if method.startswith("ms"):
        return multistep_integrate(problem, int(method[2:]), N, cfg).error
    return exprk_integrate(problem, builtin_tableaus()[method], N, cfg).error


def cmd_convergence(cfg: RunConfig, fit=True) -> ConvergenceResult:
    """Integrate to ``T`` for each ``N`` of the ladder and fit the observed order.

    Failures at one ``N`` are recorded and the ladder continues.
    """
    problem = PROBLEMS[cfg.problem](cfg.J)
    quad = cfg.quad_config()
    records, failures = [], []
    for N in cfg.N_list:
        try:
            err = _run_one(problem, cfg.method, N, quad)
            records.append(
                ConvergenceRecord(cfg.problem, cfg.method, cfg.J, cfg.K, problem.T / N, err, problem.norm_kind)
            )
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            logger.warning("N=%d failed: %s", N, exc)
            failures.append((N, str(exc)))
    order = None
    if fit:
        try:
            order = fit_order(records)
        except ValueError as exc:
            logger.warning("no order fitted: %s", exc)
    result = ConvergenceResult(records, order, failures)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(result.to_csv())
    return result


def cmd_table1(K_list=(15, 25), lambdas=TABLE1_LAMBDAS, out=None, alpha=DEFAULT_ALPHA, d=DEFAULT_D, eps=UNIT_ROUNDOFF):
    """Absolute error of ``varphi_1(lam)`` by quadrature against the series/recursion reference.

    Returns rows ``(lam, K, value, error)``; positive ``lam`` go through the
    reflection formula.
    """
    rows = []
    for K in K_list:
        cfg = ScalarEvalConfig(K=K, alpha=alpha, d=d, eps=eps)
        for lam in lambdas:
            value = phi_rk_scalar(1, lam, cfg).real
            exact = oracle_phi(1, lam).real
            rows.append((lam, K, value, abs(value - exact)))
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("lambda", "K", "value", "error"))
            for lam, K, value, err in rows:
                writer.writerow((_fmt(lam), K, _fmt(value), _fmt(err)))
    return rows


def cmd_assemble(matrix_file, method, h, cfg: QuadConfig, out=None):
    """Assemble the operators of ``method`` for a user matrix and report timings.

    The eigen-decomposition reference error is included when the matrix is
    symmetric.
    """
    A = read_matrix_file(matrix_file)
    start = time.perf_counter()
    if method.startswith("ms"):
        ops = precompute_multistep_ops(int(method[2:]), A, h, cfg)
    else:
        ops = precompute_rk_ops(builtin_tableaus()[method], A, h, cfg)
    elapsed = time.perf_counter() - start
    symmetric = np.array_equal(A, A.T)
    rows = []
    for spec, M in ops.ops.items():
        ref_err = np.linalg.norm(M - oracle_operator(spec, A, h), 2) if symmetric else float("nan")
        rows.append((spec, np.linalg.norm(M, 2), ref_err))
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("kind", "j", "k", "beta", "n", "band", "K", "h", "seconds", "norm2", "oracle_error"))
            band = "%d,%d" % bandwidth(A)
            for spec, nrm, err in rows:
                writer.writerow(
                    (spec.kind, spec.j, spec.k if spec.k is not None else "", str(spec.beta), A.shape[0],
                     band, cfg.K, _fmt(h), _fmt(elapsed), _fmt(nrm), _fmt(err))
                )
    return ops, rows, elapsed


def _parse_N_list(text):
    return [int(x) for x in text.replace(",", " ").split()]


def _parse_eps(text):
    return None if text.lower() in ("none", "basic") else float(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="phiquad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def quad_args(p, K):
        p.add_argument("--K", type=int, default=K)
        p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
        p.add_argument("--d", type=float, default=DEFAULT_D)
        p.add_argument("--eps", type=_parse_eps, default=UNIT_ROUNDOFF,
                       help="precision for parameter selection; 'basic' for the eps-free choice")
        p.add_argument("--out", default=None, help="CSV output path (default: stdout)")

    t1 = sub.add_parser("table1", help="accuracy of varphi_1 on [-1, 1]")
    quad_args(t1, 25)
    t1.add_argument("--K-list", default="15,25")

    conv = sub.add_parser("convergence", help="error ladder and fitted order")
    conv.add_argument("--problem", choices=sorted(VALID_PAIRS), default="ex1_cp")
    conv.add_argument("--method", choices=METHODS, default="ms4")
    conv.add_argument("--J", type=int, default=None)
    conv.add_argument("--N-list", default=",".join(map(str, DEFAULT_LADDER)))
    quad_args(conv, 35)

    asm = sub.add_parser("assemble", help="assemble operators for a matrix file")
    asm.add_argument("--matrix-file", required=True)
    asm.add_argument("--method", choices=METHODS, default="ms2")
    asm.add_argument("--h", type=float, default=0.01)
    quad_args(asm, 35)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    out = args.out
    if args.command == "table1":
        rows = cmd_table1([int(k) for k in args.K_list.split(",")], out=out,
                          alpha=args.alpha, d=args.d, eps=args.eps)
        if not out:
            print("lambda,K,value,error")
            for lam, K, value, err in rows:
                print(f"{_fmt(lam)},{K},{_fmt(value)},{_fmt(err)}")
    elif args.command == "convergence":
        cfg = RunConfig("convergence", args.problem, args.method, args.J, args.K, args.alpha,
                        args.d, args.eps, _parse_N_list(args.N_list), out)
        result = cmd_convergence(cfg)
        if not out:
            sys.stdout.write(result.to_csv())
        elif result.order is not None:
            print(f"fitted order: {result.order:.3f}")
    else:
        cfg = QuadConfig(K=args.K, alpha=args.alpha, d=args.d, eps=args.eps)
        _, rows, elapsed = cmd_assemble(args.matrix_file, args.method, args.h, cfg, out)
        if not out:
            print(f"assembled {len(rows)} operators in {elapsed:.3f} s")
            for spec, nrm, err in rows:
                print(f"{spec.kind} j={spec.j} k={spec.k} beta={spec.beta}: ||.||_2={nrm:.6g} oracle_err={err:.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
