"""Resolvents of extensions two ways, and their eigenvalues two ways.

The Krein-Naimark route only needs M(z) and the gamma field.  The dense route
writes (A_Theta - z) x = y with the boundary condition as one linear system.
"""
import numpy as np

from amodel.acceptance import random_model
from amodel.core import Pair
from amodel.weyl import RelationParam, extension_eigenvalues, krein_naimark, solve_extension, spectrum_scan

rng = np.random.default_rng(3)
model = random_model(rng, 2, 2, 10)
print(f"model: N={model.N}, m={model.m}, d={model.d}, Gram signature {model.gram.signature}")

for k in range(5):
    theta = RelationParam.random_self_adjoint(2, rng)
    z = complex(rng.uniform(-1, 10), rng.uniform(0.2, 2))
    y = Pair(rng.standard_normal(model.N) + 0j, rng.standard_normal(4) + 0j)
    a = krein_naimark(model, y, z, theta).flat()
    b = solve_extension(model, y, z, theta).flat()
    print(f"  trial {k}: z={z:.3f}  relative difference {np.linalg.norm(a - b) / np.linalg.norm(b):.2e}")

theta = RelationParam.random_self_adjoint(2, rng)
lo, hi = model.op.z1 - 5, model.op.eigenvalues[-1] + 5
found = spectrum_scan(model, theta, lo, hi).values
ev = extension_eigenvalues(model, theta)
real = np.sort(ev[np.abs(ev.imag) < 1e-8].real)
print(f"\nreal eigenvalues in [{lo:.2f}, {hi:.2f}]")
print("  scan   :", np.round(found, 10))
print("  pencil :", np.round(real[(real > lo) & (real < hi)], 10))
if ev.size > real.size:
    print("  non-real pencil eigenvalues (possible in a Pontryagin space):", np.round(ev[np.abs(ev.imag) >= 1e-8], 6))
