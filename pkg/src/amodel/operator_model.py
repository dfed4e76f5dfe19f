"""Finite spectral model of a lower-semibounded self-adjoint operator.

Everything is expressed in the eigenbasis of ``L``: a vector is its array of
eigencoordinates and every function of ``L`` acts diagonally.  The Hilbert
scale is carried by the weights ``(lambda_i - z1)**n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

POLE_TOL = 1e-12


class PoleError(ValueError):
    """Raised when a resolvent is requested at (or numerically at) a pole."""


@dataclass(frozen=True)
class SpectralOperator:
    """Diagonal operator ``L`` together with the model parameter ``z1``.

    Parameters
    ----------
    eigenvalues : array_like
        Real eigenvalues in ascending order, repetitions allowed.
    z1 : float
        Model parameter, strictly below the spectrum.
    """

    eigenvalues: np.ndarray
    z1: float

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        if lam.size < 1:
            raise ValueError("need at least one eigenvalue")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        if not self.z1 < lam[0]:
            raise ValueError(f"z1={self.z1} must lie strictly below min eigenvalue {lam[0]}")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "z1", float(self.z1))

    @classmethod
    def from_multiplicities(cls, pairs, z1):
        """Build from ``[(eigenvalue, multiplicity), ...]``."""
        lam = []
        for value, mult in sorted(pairs, key=lambda p: p[0]):
            lam.extend([float(value)] * int(mult))
        return cls(np.array(lam), z1)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def shifted(self) -> np.ndarray:
        """``lambda_i - z1``, all strictly positive."""
        return self.eigenvalues - self.z1

    def weight(self, t) -> np.ndarray:
        """Diagonal of ``b_1(L)**t = (L - z1)**t``."""
        return self.shifted ** t

    def multiplicities(self):
        """Groups of indices sharing one eigenvalue, in ascending order."""
        lam = self.eigenvalues
        groups, start = [], 0
        for i in range(1, lam.size + 1):
            if i == lam.size or lam[i] != lam[start]:
                groups.append(np.arange(start, i))
                start = i
        return groups

    def check_resolvent_point(self, z):
        gap = np.min(np.abs(self.eigenvalues - z))
        if gap <= POLE_TOL * max(1.0, abs(z)):
            raise PoleError(f"z={z} lies on the spectrum of L")


@dataclass(frozen=True)
class ScaleVector:
    """Eigencoordinates of an element of the scale space ``h_n``."""

    coords: np.ndarray
    scale_index: float = 0

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=complex).reshape(-1))

    def norm_sq(self, op: SpectralOperator, n=None) -> float:
        n = self.scale_index if n is None else n
        return float(np.sum(np.abs(self.coords) ** 2 * op.weight(n)))


@dataclass(frozen=True)
class SingularFamily:
    """The ``d`` functionals ``phi_sigma`` (rows of ``phi``) of order ``m``."""

    phi: np.ndarray
    m: int

    def __post_init__(self):
        phi = np.atleast_2d(np.asarray(self.phi, dtype=complex))
        if self.m < 1:
            raise ValueError("order m must be >= 1")
        d, n = phi.shape
        if n < self.m * d:
            raise ValueError(f"need N >= m*d, got N={n}, m*d={self.m * d}")
        if np.linalg.matrix_rank(phi) < d:
            raise ValueError("functionals phi_sigma are linearly dependent")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def d(self) -> int:
        return self.phi.shape[0]

    @property
    def dim(self) -> int:
        return self.phi.shape[1]

    def vector(self, sigma: int) -> ScaleVector:
        return ScaleVector(self.phi[sigma], -(self.m + 2))


def _check_len(u, v):
    if u.coords.size != v.coords.size:
        raise ValueError(f"length mismatch: {u.coords.size} != {v.coords.size}")


def apply_bn(op: SpectralOperator, v: ScaleVector, t) -> ScaleVector:
    """Apply ``(L - z1)**t``; the scale index drops by ``2t``."""
    return ScaleVector(v.coords * op.weight(t), v.scale_index - 2 * t)


def inner_n(op: SpectralOperator, u: ScaleVector, v: ScaleVector, n) -> complex:
    """Scalar product of ``h_n``, conjugate-linear in ``u``."""
    _check_len(u, v)
    return complex(np.sum(np.conj(u.coords) * v.coords * op.weight(n)))


def resolvent_apply(op: SpectralOperator, v: ScaleVector, z) -> ScaleVector:
    """``(L - z)**-1 v``."""
    op.check_resolvent_point(z)
    return ScaleVector(v.coords / (op.eigenvalues - z), v.scale_index + 2)


def h_vector(op: SpectralOperator, fam: SingularFamily, sigma: int, j: int) -> ScaleVector:
    """``h_{sigma j} = (L - z1)**-j phi_sigma``."""
    return apply_bn(op, fam.vector(sigma), -j)


def duality(phi: ScaleVector, f: ScaleVector) -> complex:
    """Pairing ``<phi, f>`` extended from the ``h_0`` product."""
    _check_len(phi, f)
    return complex(np.vdot(phi.coords, f.coords))


@dataclass(frozen=True)
class TailRule:
    """Power-law tails ``lambda_i ~ i**p`` and ``|phi_i| ~ i**q``."""

    spectral_exponent: float
    coefficient_exponent: float

    def __post_init__(self):
        if not self.spectral_exponent > 0:
            raise ValueError("spectral exponent p must be positive")


@dataclass(frozen=True)
class OrderReport:
    n_star: int
    threshold: float
    truncations: tuple = ()
    partial_sums: dict = field(default_factory=dict)


def classify_order(rule: TailRule, truncations=tuple(2 ** k for k in range(8, 15))) -> OrderReport:
    """Smallest ``n`` with ``phi`` in ``h_{-n}`` for the given tail rule.

    ``sum_i i**(2q - p n)`` converges iff ``n > (2q + 1)/p``.  Partial sums
    at ``n*-1`` (divergent) and ``n*`` (convergent) are returned alongside so
    the growth can be inspected.
    """
    p, q = rule.spectral_exponent, rule.coefficient_exponent
    threshold = (2 * q + 1) / p
    if not np.isfinite(threshold):
        n_star = 0
    else:
        n_star = max(0, int(np.floor(threshold)) + 1)
    sums = {}
    if np.isfinite(q):
        i_all = np.arange(1, max(truncations) + 1, dtype=float)
        for n in (n_star - 1, n_star):
            terms = i_all ** (2 * q - p * n)
            cs = np.cumsum(terms)
            sums[n] = np.array([cs[t - 1] for t in truncations])
    return OrderReport(n_star, threshold, tuple(truncations), sums)
