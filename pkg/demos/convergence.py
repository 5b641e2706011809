"""
Convergence of exponential integrators on a nonlocal heat equation
==================================================================

u_t = u_xx + int_0^1 u dx + g with u = x (1 - x) e^t.  Space is resolved
exactly, so the printed errors are pure time errors.  The second and third
order methods converge with reduced orders near 1.75 and 2.75.
"""

from phiquad.harness import RunConfig, cmd_convergence

for method in ("euler", "rk2", "rk3"):
    cfg = RunConfig(problem="ex2_ho", method=method, J=100, K=25, N_list=[4, 8, 16, 32, 64, 128])
    res = cmd_convergence(cfg)
    print(method)
    for rec in res.records:
        print(f"  h={rec.h:.5f}  error={rec.error:.3e}")
    print(f"  fitted order {res.order:.2f}")

# a multistep run uses exact starting values by default
from phiquad import multistep_integrate
from phiquad.problems import make_ex1_cp

prob = make_ex1_cp(J=128)
for N in (8, 16, 32):
    print("ms3", N, multistep_integrate(prob, 3, N).error)
