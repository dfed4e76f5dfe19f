"""The Gram element of the two-particle example: closed form vs the r -> 0 limit."""
import numpy as np

from amodel.rashba import (
    RashbaParams,
    besselK,
    besselK_quadrature,
    convergence_slope,
    gram_element_closed,
    gram_element_limit,
    limit_estimates,
)

print("K_nu(x) against the integral representation")
for x in (1e-6, 1e-2, 1.0, 2.0, 10.0, 50.0):
    errs = [abs(besselK(nu, x) / besselK_quadrature(nu, x) - 1) for nu in (0, 1, 2)]
    print(f"  x={x:<7g} rel errors {errs[0]:.1e} {errs[1]:.1e} {errs[2]:.1e}")

p = RashbaParams(1.0, 1.0, 2.0)
r_seq = (1e-2, 5e-3, 2.5e-3)
print(f"\n(N, a1, a2) = (1, 1, 2): closed form {gram_element_closed(p):.10e}")
for r, v in zip(r_seq, limit_estimates(p, r_seq)):
    print(f"  r = {r:<7g} estimate {v:.10e}")
print(f"  extrapolated            {gram_element_limit(p):.10e}")
print(f"  convergence slope {convergence_slope(p):.2f} (an r^2 log r term keeps it a little under 2)")

print("\nrandom pairs")
rng = np.random.default_rng(0)
for _ in range(5):
    a1, a2 = rng.uniform(0.5, 5, 2)
    q = RashbaParams(1.0, a1, a2)
    c, l = gram_element_closed(q), gram_element_limit(q)
    print(f"  a1={a1:.3f} a2={a2:.3f}  closed {c:.6e}  limit {l:.6e}  rel err {abs(l / c - 1):.1e}")
