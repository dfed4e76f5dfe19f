"""A two-level operator with one functional of order one.

L = diag(1, 2), z1 = 0, phi = (1, 1), Gram matrix [[1]].  Every number printed
here can be checked by hand.
"""
import numpy as np

from amodel import RelationParam, SingularFamily, SpectralOperator, make_model, spectrum_scan
from amodel.weyl import M_eval, extension_eigenvalues

op = SpectralOperator(np.array([1.0, 2.0]), 0.0)
model = make_model(op, SingularFamily(np.array([[1.0, 1.0]]), 1), np.array([[1.0]]))

s = M_eval(model, -1.0)
print("At z = -1:")
print(f"  q = {s.q[0, 0].real:+.15f}   (hand value -7/12 = {-7 / 12:+.15f})")
print(f"  r = {s.r[0, 0].real:+.15f}   (hand value  1)")
print(f"  M = {s.M[0, 0].real:+.15f}   (hand value  5/12 = {5 / 12:+.15f})")

rng = np.random.default_rng(0)
s1, s2 = model.random_state(rng), model.random_state(rng)
lhs, rhs = model.green_terms(s1, s2)
print(f"\nGreen identity on two random states: |lhs - rhs| = {abs(lhs - rhs):.2e} (terms of size {abs(lhs):.2e})")

print("\nEigenvalues of the extension with Gamma1 = tau Gamma0:")
for tau in (-2.0, 0.0, 2.0):
    theta = RelationParam.graph(np.array([[tau]]))
    scan = spectrum_scan(model, theta, -6.0, 8.0).values
    pencil = np.sort(extension_eigenvalues(model, theta).real)
    print(f"  tau={tau:+.1f}: scan {np.round(scan, 12)}  pencil {np.round(pencil, 12)}")
