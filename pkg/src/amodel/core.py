"""The A-model space in explicit coordinates.

A domain element of ``A_max`` is stored as the triple ``(fsharp, c, xi)``
standing for ``fsharp + h_{m+1}(c) + k`` with ``d(k) = xi``.  The
coefficient vector ``xi`` is indexed by ``alpha = (sigma, j)`` with ``j``
running fastest, i.e. ``xi[sigma*m + (j-1)]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .operator_model import PoleError, SingularFamily, SpectralOperator

COND_MAX = 1e12
COMMUTATOR_RTOL = 1e-12


class GramError(ValueError):
    """Gram matrix has the wrong shape or is not usable for the model."""


class IllConditionedError(ValueError):
    pass


class ProjectionError(ValueError):
    """Projection is not an orthogonal projection reducing ``L``."""


def alpha(sigma: int, j: int, m: int) -> int:
    """Flat position of ``(sigma, j)``, ``j`` in ``1..m``."""
    return sigma * m + (j - 1)


@dataclass(frozen=True)
class JordanMatrix:
    m: int
    d: int
    z1: float
    entries: np.ndarray

    @property
    def block(self) -> np.ndarray:
        return self.entries[: self.m, : self.m]


def jordan_block(m: int, z1: float) -> np.ndarray:
    return z1 * np.eye(m) + np.eye(m, k=1)


def build_jordan(m: int, d: int, z1: float) -> JordanMatrix:
    """Direct sum of ``d`` upper Jordan blocks of size ``m`` with eigenvalue ``z1``."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    entries = np.kron(np.eye(d), jordan_block(m, z1))
    entries.setflags(write=False)
    return JordanMatrix(m, d, float(z1), entries)


def jordan_resolvent_entry(m: int, z1: float, j: int, z) -> complex:
    """Entry ``(j, m)`` of ``(M - z)**-1`` for one Jordan block."""
    if z == z1:
        raise PoleError("z equals the model parameter z1")
    if not 1 <= j <= m:
        raise ValueError("j must lie in 1..m")
    return -1.0 / (z - z1) ** (m - j + 1)


def jordan_resolvent(jm: JordanMatrix, z) -> np.ndarray:
    """``(M_d - z)**-1`` from the finite Neumann series of the nilpotent part."""
    if z == jm.z1:
        raise PoleError("z equals the model parameter z1")
    m = jm.m
    w = jm.z1 - z
    nil = np.eye(m, k=1)
    inv = np.zeros((m, m), dtype=complex)
    power = np.eye(m)
    for k in range(m):
        inv += (-1) ** k * power / w ** (k + 1)
        power = power @ nil
    return np.kron(np.eye(jm.d), inv)


def eta(c, m: int) -> np.ndarray:
    """``eta(c)``: ``c_sigma`` placed at the ``j = m`` slots."""
    c = np.asarray(c, dtype=complex)
    out = np.zeros(c.size * m, dtype=complex)
    out[m - 1 :: m] = c
    return out


def top_slots(v, m: int) -> np.ndarray:
    """``[v]_m``: the ``j = m`` components of a length ``m*d`` vector."""
    return np.asarray(v)[m - 1 :: m]


@dataclass(frozen=True)
class GramA:
    """Model Gram matrix with its admissibility report."""

    matrix: np.ndarray
    m: int
    admissible: bool
    cond: float
    hermitian: bool
    commutator_norm: float
    matches_corner_pattern: bool
    matches_hankel: bool
    signature: tuple

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // self.m

    @property
    def is_hilbert(self) -> bool:
        return self.signature[1] == 0


def hankel_pattern_ok(G: np.ndarray, m: int, tol: float) -> bool:
    """Each ``(sigma, sigma')`` block is Hankel with zero anti-diagonals ``j + j' <= m``."""
    d = G.shape[0] // m
    for s in range(d):
        for t in range(d):
            B = G[s * m : (s + 1) * m, t * m : (t + 1) * m]
            for i in range(m):
                for k in range(m):
                    s_idx = i + k + 2
                    if s_idx <= m:
                        if abs(B[i, k]) > tol:
                            return False
                    elif i > 0 and k < m - 1:
                        if abs(B[i, k] - B[i - 1, k + 1]) > tol:
                            return False
    return True


def corner_pattern_ok(G: np.ndarray, m: int, tol: float) -> bool:
    """A narrower sparsity pattern: zeros off the ``j = m`` row/column band.

    ``G[sj, s'j'] = 0`` for ``j, j' < m`` and
    ``G[sj, s'm] = conj(G[s'm, sj]) = G[s,j+1; s',m-1]``.
    """
    if m == 1:
        return True
    d = G.shape[0] // m
    for s in range(d):
        for t in range(d):
            for j in range(1, m + 1):
                for jp in range(1, m + 1):
                    if j < m and jp < m and abs(G[alpha(s, j, m), alpha(t, jp, m)]) > tol:
                        return False
                if j < m:
                    v = G[alpha(s, j, m), alpha(t, m, m)]
                    if abs(v - np.conj(G[alpha(t, m, m), alpha(s, j, m)])) > tol:
                        return False
                    if abs(v - G[alpha(s, j + 1, m), alpha(t, m - 1, m)]) > tol:
                        return False
    return True


def validate_gram(G, M: JordanMatrix, cond_max: float = COND_MAX) -> GramA:
    """Judge ``G`` against the commutation relation ``G M_d = M_d^* G``."""
    G = np.asarray(G, dtype=complex)
    n = M.m * M.d
    if G.shape != (n, n):
        raise GramError(f"Gram matrix must be {n}x{n}, got {G.shape}")
    scale = max(np.linalg.norm(G), np.finfo(float).tiny)
    hermitian = bool(np.linalg.norm(G - G.conj().T) <= 1e-13 * scale)
    comm = float(np.linalg.norm(G @ M.entries - M.entries.conj().T @ G))
    cond = float(np.linalg.cond(G))
    eig = np.linalg.eigvalsh((G + G.conj().T) / 2)
    tol = 1e-12 * scale
    signature = (int(np.sum(eig > 0)), int(np.sum(eig < 0)))
    admissible = hermitian and comm <= COMMUTATOR_RTOL * scale and cond < cond_max
    G = G.copy()
    G.setflags(write=False)
    return GramA(
        matrix=G,
        m=M.m,
        admissible=bool(admissible),
        cond=cond,
        hermitian=hermitian,
        commutator_norm=comm,
        matches_corner_pattern=corner_pattern_ok(G, M.m, tol),
        matches_hankel=hankel_pattern_ok(G, M.m, tol),
        signature=signature,
    )


def hankel_gram(coeffs, m: int) -> np.ndarray:
    """Assemble a Gram matrix from anti-diagonal values.

    ``coeffs[s, t]`` holds ``b_{m+1}, ..., b_{2m}`` of block ``(s, t)``;
    only ``s <= t`` is read, the rest follows from Hermitian symmetry.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    d = coeffs.shape[0]
    G = np.zeros((m * d, m * d), dtype=complex)
    for s in range(d):
        for t in range(s, d):
            b = coeffs[s, t] if s != t else coeffs[s, t].real
            B = np.zeros((m, m), dtype=complex)
            for i in range(m):
                for k in range(m):
                    idx = i + k + 2 - (m + 1)
                    if idx >= 0:
                        B[i, k] = b[idx]
            G[s * m : (s + 1) * m, t * m : (t + 1) * m] = B
            if s != t:
                G[t * m : (t + 1) * m, s * m : (s + 1) * m] = B.conj().T
    return G


def sample_admissible_gram(m: int, d: int, seed=None, z1: float = 0.0,
                           cond_max: float = COND_MAX, max_tries: int = 100) -> GramA:
    """Random admissible Gram matrix from the Hankel parametrization."""
    rng = np.random.default_rng(seed)
    M = build_jordan(m, d, z1)
    for _ in range(max_tries):
        coeffs = rng.standard_normal((d, d, m)) + 1j * rng.standard_normal((d, d, m))
        gram = validate_gram(hankel_gram(coeffs, m), M, cond_max)
        if gram.admissible:
            return gram
    raise GramError(f"no admissible Gram matrix with cond < {cond_max} after {max_tries} draws")


def commutator_map(m: int, d: int, z1: float = 0.0) -> np.ndarray:
    """Real matrix of ``G -> G M_d - M_d^* G`` restricted to Hermitian ``G``.

    Hermitian matrices are coordinatized by ``(md)**2`` real numbers: the
    real diagonal, then real and imaginary parts of the strict upper part.
    """
    n = m * d
    M = build_jordan(m, d, z1).entries
    basis = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1
        basis.append(E)
    for i in range(n):
        for k in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, k] = E[k, i] = 1
            basis.append(E)
            E = np.zeros((n, n), dtype=complex)
            E[i, k], E[k, i] = 1j, -1j
            basis.append(E)
    cols = []
    for E in basis:
        C = E @ M - M.conj().T @ E
        cols.append(np.concatenate([C.real.ravel(), C.imag.ravel()]))
    return np.array(cols).T, basis


def hermitian_coords(G: np.ndarray) -> np.ndarray:
    """Real coordinates of Hermitian ``G`` matching :func:`commutator_map`."""
    n = G.shape[0]
    out = [G[i, i].real for i in range(n)]
    for i in range(n):
        for k in range(i + 1, n):
            out += [G[i, k].real, G[i, k].imag]
    return np.array(out)


def admissible_dimension(m: int, d: int, rtol: float = 1e-10) -> int:
    """Real dimension of the admissible Hermitian family, by SVD rank."""
    A, _ = commutator_map(m, d)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > rtol * s.max())) if s.size and s.max() > 0 else 0
    return A.shape[1] - rank


def corner_pattern_dimension(m: int, d: int) -> int:
    """Real dimension of the Hermitian ``G`` obeying the corner pattern."""
    _, basis = commutator_map(m, d)
    n = m * d
    rows = []
    # impose the corner-pattern conditions as real linear equations on the basis coords
    for s in range(d):
        for t in range(d):
            for j in range(1, m + 1):
                for jp in range(1, m + 1):
                    conds = []
                    if m > 1 and j < m and jp < m:
                        conds.append([(alpha(s, j, m), alpha(t, jp, m), 1)])
                    if m > 1 and j < m and jp == m:
                        conds.append([(alpha(s, j, m), alpha(t, m, m), 1),
                                      (alpha(s, j + 1, m), alpha(t, m - 1, m), -1)])
                    for cond in conds:
                        re = [sum(w * E[a, b] for a, b, w in cond).real for E in basis]
                        im = [sum(w * E[a, b] for a, b, w in cond).imag for E in basis]
                        rows += [re, im]
    if not rows:
        return n * n
    A = np.array(rows)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s.max())) if s.max() > 0 else 0
    return n * n - rank


@dataclass(frozen=True)
class GramTilde:
    matrix: np.ndarray


def h_matrix(op: SpectralOperator, phi: np.ndarray, m: int) -> np.ndarray:
    """Rows ``h_alpha``, ``alpha = (sigma, j)``, ``j = 1..m``, as an ``(md, N)`` array."""
    d = phi.shape[0]
    rows = np.empty((m * d, phi.shape[1]), dtype=complex)
    for s in range(d):
        for j in range(1, m + 1):
            rows[alpha(s, j, m)] = phi[s] * op.weight(-j)
    return rows


def gram_tilde(op: SpectralOperator, fam: SingularFamily, cond_max: float = COND_MAX) -> GramTilde:
    """``[G~]_{alpha alpha'} = <h_alpha, h_alpha'>_{-m}``."""
    H = h_matrix(op, fam.phi, fam.m)
    G = (H.conj() * op.weight(-fam.m)) @ H.T
    G = (G + G.conj().T) / 2  # exactly Hermitian
    eig = np.linalg.eigvalsh(G)
    if eig[0] <= 0 or eig[-1] / eig[0] > cond_max:
        raise IllConditionedError("Gram matrix of h_alpha is not safely positive definite")
    return GramTilde(G)


@dataclass(frozen=True)
class ModelState:
    """Coordinates ``(fsharp, c, xi)`` of ``fsharp + h_{m+1}(c) + k``."""

    fsharp: np.ndarray
    c: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        for name in ("fsharp", "c", "xi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex).reshape(-1))

    def __add__(self, other):
        return ModelState(self.fsharp + other.fsharp, self.c + other.c, self.xi + other.xi)

    def __sub__(self, other):
        return ModelState(self.fsharp - other.fsharp, self.c - other.c, self.xi - other.xi)

    def scaled(self, a):
        return ModelState(a * self.fsharp, a * self.c, a * self.xi)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.fsharp, self.c, self.xi])


class Pair(NamedTuple):
    """Element ``(f, xi)`` of ``h_m (+) C^{md}``."""

    f: np.ndarray
    xi: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.f, self.xi])


class AModel:
    """Operator, functionals and Gram matrix bundled into one model.

    ``phi`` and ``basis`` may be overridden to build the model inside a
    reducing subspace: ``basis`` then holds orthonormal columns spanning the
    admissible ``h_m`` coordinates.
    """

    def __init__(self, op: SpectralOperator, fam: SingularFamily, gram: GramA,
                 *, phi=None, basis=None, require_admissible: bool = True):
        if gram.m != fam.m or gram.d != fam.d:
            raise GramError("Gram matrix dimensions do not match (m, d) of the family")
        if fam.dim != op.dim:
            raise ValueError("functionals and operator have different dimension N")
        if require_admissible and not gram.admissible:
            raise GramError("Gram matrix violates the commutation relation")
        self.op = op
        self.family = fam
        self.gram = gram
        self.m = fam.m
        self.d = fam.d
        self.jordan = build_jordan(self.m, self.d, op.z1)
        self.phi = fam.phi if phi is None else np.asarray(phi, dtype=complex)
        self.basis = basis

    @property
    def G(self) -> np.ndarray:
        return self.gram.matrix

    @property
    def N(self) -> int:
        return self.op.dim

    # ambient pieces -------------------------------------------------------
    def h(self, c, j=None) -> np.ndarray:
        """``h_j(c) = sum_sigma c_sigma (L-z1)**-j phi_sigma``, default ``j = m+1``."""
        j = self.m + 1 if j is None else j
        return (np.asarray(c, dtype=complex) @ self.phi) * self.op.weight(-j)

    def embed(self, s: ModelState) -> Pair:
        return Pair(s.fsharp + self.h(s.c), s.xi)

    def k_vector(self, xi) -> np.ndarray:
        """Eigencoordinates of ``k = sum_alpha xi_alpha h_alpha``."""
        return np.asarray(xi) @ h_matrix(self.op, self.phi, self.m)

    def ambient(self, s: ModelState) -> np.ndarray:
        """``fsharp + h_{m+1}(c) + k`` as one vector in ``h_{-m}``."""
        return s.fsharp + self.h(s.c) + self.k_vector(s.xi)

    def zero_state(self) -> ModelState:
        return ModelState(np.zeros(self.N), np.zeros(self.d), np.zeros(self.m * self.d))

    def random_state(self, rng) -> ModelState:
        def cvec(n):
            return rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f = cvec(self.N)
        if self.basis is not None:
            f = self.basis @ (self.basis.conj().T @ f)
        return ModelState(f, cvec(self.d), cvec(self.m * self.d))

    # metric ---------------------------------------------------------------
    def pair_inner(self, a: Pair, b: Pair) -> complex:
        """``<f, f'>_m + <xi, G xi'>``, conjugate-linear in ``a``."""
        fpart = np.sum(np.conj(a.f) * b.f * self.op.weight(self.m))
        return complex(fpart + np.vdot(a.xi, self.G @ b.xi))

    def model_inner(self, s1, s2) -> complex:
        a = self.embed(s1) if isinstance(s1, ModelState) else Pair(*s1)
        b = self.embed(s2) if isinstance(s2, ModelState) else Pair(*s2)
        return self.pair_inner(a, b)

    # operators -----------------------------------------------------------
    def amax_apply(self, s: ModelState) -> Pair:
        lam = self.op.eigenvalues
        f = lam * s.fsharp + self.op.z1 * self.h(s.c)
        return Pair(f, self.jordan.entries @ s.xi + eta(s.c, self.m))

    def gamma0(self, s: ModelState) -> np.ndarray:
        return s.c.copy()

    def gamma1(self, s: ModelState) -> np.ndarray:
        self._check_in_subspace(s.fsharp)
        return self.phi.conj() @ s.fsharp - top_slots(self.G @ s.xi, self.m)

    def _check_in_subspace(self, f, tol=1e-10):
        if self.basis is None:
            return
        resid = f - self.basis @ (self.basis.conj().T @ f)
        if np.linalg.norm(resid) > tol * max(1.0, np.linalg.norm(f)):
            raise ProjectionError("fsharp is not in the range of the projection")

    def green_terms(self, s1: ModelState, s2: ModelState):
        lhs = (self.model_inner(s1, self.amax_apply(s2))
               - self.model_inner(self.amax_apply(s1), s2))
        rhs = (np.vdot(self.gamma0(s1), self.gamma1(s2))
               - np.vdot(self.gamma1(s1), self.gamma0(s2)))
        return complex(lhs), complex(rhs)

    def green_residual(self, s1: ModelState, s2: ModelState) -> float:
        lhs, rhs = self.green_terms(s1, s2)
        return abs(lhs - rhs)

    def green_scale(self, s1: ModelState, s2: ModelState) -> float:
        """Magnitude of the individual terms, for relative tolerances."""
        a = abs(self.model_inner(s1, self.amax_apply(s2)))
        b = abs(self.model_inner(self.amax_apply(s1), s2))
        c = np.linalg.norm(self.gamma0(s1)) * np.linalg.norm(self.gamma1(s2))
        e = np.linalg.norm(self.gamma1(s1)) * np.linalg.norm(self.gamma0(s2))
        return float(max(a, b, c, e, np.finfo(float).tiny))

    def boundary_preimage(self, a, b) -> ModelState:
        """A state with ``Gamma0 = a`` and ``Gamma1 = b`` (``xi = 0``)."""
        A = self.phi.conj()
        if self.basis is not None:
            A = A @ self.basis
        sol, *_ = np.linalg.lstsq(A, np.asarray(b, dtype=complex), rcond=None)
        f = sol if self.basis is None else self.basis @ sol
        return ModelState(f, np.asarray(a, dtype=complex), np.zeros(self.m * self.d))

    def in_min_domain(self, s: ModelState, tol: float = 1e-10) -> bool:
        """``c = 0`` and ``<phi, fsharp> = [G xi]_m``."""
        g1 = self.phi.conj() @ s.fsharp - top_slots(self.G @ s.xi, self.m)
        scale = max(1.0, np.linalg.norm(s.flat()))
        return bool(np.linalg.norm(s.c) <= tol * scale and np.linalg.norm(g1) <= tol * scale)


def make_model(op: SpectralOperator, fam: SingularFamily, G=None, *, seed=None,
               cond_max: float = COND_MAX) -> AModel:
    """Convenience: validate ``G`` (or sample one) and build the model."""
    if G is None:
        gram = sample_admissible_gram(fam.m, fam.d, seed=seed, z1=op.z1, cond_max=cond_max)
    else:
        gram = validate_gram(G, build_jordan(fam.m, fam.d, op.z1), cond_max)
    return AModel(op, fam, gram)
