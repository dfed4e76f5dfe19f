"""Which Gram matrices make the boundary maps work.

The commutation constraint cuts the Hermitian (md x md) matrices down to a
Hankel family of real dimension m*d^2.  A sparser corner pattern that keeps
only the two top coefficients of each block is strictly smaller once m >= 3.
"""
import numpy as np

from amodel.core import (
    AModel,
    admissible_dimension,
    build_jordan,
    corner_pattern_dimension,
    sample_admissible_gram,
    validate_gram,
)
from amodel.operator_model import SingularFamily, SpectralOperator

print(" m  d  hermitian  admissible  m*d^2  corner")
for m in range(1, 5):
    for d in range(1, 4):
        print(f"{m:2d} {d:2d} {(m * d) ** 2:10d} {admissible_dimension(m, d):11d} {m * d * d:6d} {corner_pattern_dimension(m, d):7d}")

g = sample_admissible_gram(3, 2, seed=7)
print(f"\nsampled m=3, d=2: signature {g.signature} -> {'Hilbert' if g.is_hilbert else 'Pontryagin'} model space")
print(np.round(g.matrix.real[:3, :3], 3))

# negative control: the identity satisfies nothing at m = 2
gram = validate_gram(np.eye(2), build_jordan(2, 1, 0.0))
print(f"\nidentity at m=2: admissible={gram.admissible}, commutator norm {gram.commutator_norm:.4f}")
rng = np.random.default_rng(1)
op = SpectralOperator(np.linspace(1, 6, 8), 0.0)
bad = AModel(op, SingularFamily(rng.standard_normal((1, 8)) + 0j, 2), gram, require_admissible=False)
res = bad.green_residual(bad.random_state(rng), bad.random_state(rng))
print(f"Green residual with that Gram matrix: {res:.3e}")
