"""
Scalar phi-functions without cancellation
=========================================

The textbook formula (exp(z) - 1) / z loses every digit as z -> 0.
Inverting a Laplace transform on a hyperbola does not.
"""

import math

import numpy as np

from phiquad import ScalarEvalConfig, oracle_phi, phi_rk_scalar

cfg = ScalarEvalConfig(K=25)

print(f"{'lambda':>10} {'naive error':>12} {'quadrature error':>17}")
for p in range(1, 14, 2):
    lam = -(10.0**-p)
    exact = math.expm1(lam) / lam
    naive = (math.exp(lam) - 1) / lam
    quad = phi_rk_scalar(1, lam, cfg).real
    print(f"{lam:10.0e} {abs(naive - exact):12.2e} {abs(quad - exact):17.2e}")

# the same rule serves higher phi-functions and complex arguments
lam = -8.0 + 0.5j
for k in range(1, 5):
    print(k, phi_rk_scalar(k, lam, cfg), abs(phi_rk_scalar(k, lam, cfg) - oracle_phi(k, lam)))

# positive arguments go through the reflected transform or the residue
for lam in (0.5, 3.0, 40.0):
    rel = abs(phi_rk_scalar(2, lam, cfg) / oracle_phi(2, lam) - 1)
    print(f"varphi_2({lam}) relative error {rel:.1e}")

# nodes and weights of the rule, symmetric about the real axis
rule = cfg.rule(1, halved=False)
print("vertex", rule.nodes[cfg.K].real, "outermost", rule.nodes[0])
print("conjugate symmetric:", np.array_equal(rule.nodes[::-1], np.conj(rule.nodes)))
