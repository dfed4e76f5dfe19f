"""The A-model inside a reducing subspace of ``L``.

At finite dimension a nested family of scale projections collapses to a single
orthogonal projection commuting with ``L``; that commuting case is what is
implemented here.  The conjugated forms ``b^{1/2} P b^{-1/2}`` are still
evaluated literally so their agreement with ``P`` can be checked.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .core import AModel, IllConditionedError, ProjectionError, eta, h_matrix
from .operator_model import SpectralOperator
from .weyl import q_alt_eval, q_eval, r_eval


@dataclass(frozen=True)
class ReducingProjection:
    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=complex)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ProjectionError("projection must be a square matrix")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)

    def check(self, op: SpectralOperator, tol=1e-12):
        P = self.P
        if P.shape[0] != op.dim:
            raise ProjectionError("projection dimension differs from N")
        if np.linalg.norm(P @ P - P) > 10 * tol or np.linalg.norm(P - P.conj().T) > 10 * tol:
            raise ProjectionError("P is not a Hermitian idempotent")
        lam = op.eigenvalues
        comm = np.linalg.norm(P * lam[None, :] - lam[:, None] * P)
        if comm > tol * max(1.0, np.abs(lam).max()):
            raise ProjectionError(f"P does not commute with L (||[P, L]|| = {comm:.3e})")
        return self

    @property
    def complement(self) -> "ReducingProjection":
        return ReducingProjection(np.eye(self.P.shape[0]) - self.P)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.P).real))

    def basis(self) -> np.ndarray:
        """Orthonormal columns spanning ``ran P``."""
        w, v = np.linalg.eigh((self.P + self.P.conj().T) / 2)
        return v[:, w > 0.5]

    @classmethod
    def diagonal(cls, n, indices):
        P = np.zeros((n, n))
        P[list(indices), list(indices)] = 1
        return cls(P)

    @classmethod
    def from_blocks(cls, op: SpectralOperator, blocks):
        """``blocks``: iterable of ``(indices, unitary, rank)``.

        Within the eigenspace spanned by ``indices`` the projection is onto the
        first ``rank`` columns of ``unitary``.
        """
        n = op.dim
        P = np.zeros((n, n), dtype=complex)
        for idx, U, r in blocks:
            idx = np.asarray(idx)
            if len(set(op.eigenvalues[idx])) != 1:
                raise ProjectionError("block indices must share one eigenvalue")
            U = np.asarray(U, dtype=complex)
            Ur = U[:, :r]
            P[np.ix_(idx, idx)] = Ur @ Ur.conj().T
        return cls(P)

    @classmethod
    def random(cls, op: SpectralOperator, rng):
        """Random reducing projection mixing each degenerate eigenspace."""
        blocks = []
        for idx in op.multiplicities():
            k = idx.size
            U = unitary_group.rvs(k, random_state=rng) if k > 1 else np.ones((1, 1))
            blocks.append((idx, U, int(rng.integers(0, k + 1))))
        return cls.from_blocks(op, blocks)


def scaled_projection(op: SpectralOperator, P: ReducingProjection, n) -> np.ndarray:
    """``b_n(L)^{1/2} P b_n(L)^{-1/2}``, the ``h_0`` picture of a scale projection."""
    w = op.weight(n / 2)
    return (w[:, None] * P.P) / w[None, :]


def projected_resolvent(op: SpectralOperator, P: ReducingProjection, v, z) -> np.ndarray:
    """``P (L - z)^-1 P v`` for ``v`` in ``ran P``."""
    op.check_resolvent_point(z)
    return P.P @ ((P.P @ np.asarray(v, dtype=complex)) / (op.eigenvalues - z))


@dataclass(frozen=True)
class SplitFamily:
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    h_minus: np.ndarray
    h_plus: np.ndarray
    m: int


def split_functionals(model: AModel, P: ReducingProjection, *, trials=100, seed=0, tol=1e-12) -> SplitFamily:
    """``phi^-_s = b_{m+2}^{1/2} P b_{m+2}^{-1/2} phi_s`` and the matching ``h^-`` table."""
    op, m = model.op, model.m
    P.check(op)
    C = scaled_projection(op, P, m + 2)
    phi = model.family.phi
    phi_minus = phi @ C.T
    phi_plus = phi - phi_minus
    direct = phi @ P.P.T
    if np.linalg.norm(phi_minus - direct) > tol * max(1.0, np.linalg.norm(phi)):
        raise ProjectionError("conjugated projection differs from P on phi")
    # <phi, f-> = <phi-, f-> on ran P
    rng = np.random.default_rng(seed)
    f = P.P @ (rng.standard_normal((op.dim, trials)) + 1j * rng.standard_normal((op.dim, trials)))
    lhs, rhs = phi.conj() @ f, phi_minus.conj() @ f
    if np.max(np.abs(lhs - rhs)) > 1e3 * tol * max(1.0, np.abs(lhs).max()):
        raise ProjectionError("pairing identity on ran P fails")
    return SplitFamily(phi_minus, phi_plus, h_matrix(op, phi_minus, m), h_matrix(op, phi_plus, m), m)


def spir_residual(model: AModel, split: SplitFamily, f_minus) -> float:
    """``max |<phi, f-> - <h^-_{m+1}, (L - z1) f->_m|`` over the ``d`` functionals."""
    op, m = model.op, model.m
    hm1 = split.phi_minus * op.weight(-(m + 1))
    lhs = model.family.phi.conj() @ f_minus
    rhs = (hm1.conj() * op.weight(m)) @ (op.shifted * f_minus)
    return float(np.max(np.abs(lhs - rhs)))


def gram_tilde_split(model: AModel, split: SplitFamily):
    """``(G~, G~-, G~+)`` with ``[G~pm]_{a a'} = <h_a, h^pm_a'>_{-m}``."""
    op, m = model.op, model.m
    H = h_matrix(op, model.family.phi, m)
    wt = op.weight(-m)
    Gt = (H.conj() * wt) @ H.T
    Gm = (H.conj() * wt) @ split.h_minus.T
    Gp = (H.conj() * wt) @ split.h_plus.T
    return Gt, Gm, Gp


def eta_pm(model: AModel, split: SplitFamily, c, sign: str) -> np.ndarray:
    Gt, Gm, Gp = gram_tilde_split(model, split)
    if np.linalg.cond(Gt) > 1e12:
        raise IllConditionedError("Gram matrix of h_alpha is ill-conditioned")
    Gs = Gm if sign == "-" else Gp
    return np.linalg.solve(Gt, Gs @ eta(c, model.m))


def sigma_kernel(model: AModel, split: SplitFamily, sign: str = "-", rtol=1e-10):
    """Basis of ``{c : sum_s c_s phi^sign_s = 0}`` and its image under ``eta^{other}``.

    The image spans the multivalued part of the projected maximal relation.
    """
    phis = split.phi_minus if sign == "-" else split.phi_plus
    other = "+" if sign == "-" else "-"
    ns = scipy.linalg.null_space(phis.T, rcond=rtol)
    md = model.m * model.d
    mul = np.array([eta_pm(model, split, c, other) for c in ns.T]).reshape(ns.shape[1], md)
    return ns, mul.T


def subspace_model(model: AModel, P: ReducingProjection, sign: str = "-") -> AModel:
    """The model on ``ran P`` (or its complement for ``sign='+'``), same Gram matrix."""
    P.check(model.op)
    proj = P if sign == "-" else P.complement
    split = split_functionals(model, proj)
    basis = proj.basis()
    return AModel(model.op, model.family, model.gram, phi=split.phi_minus, basis=basis)


def q_pm_eval(model: AModel, P: ReducingProjection, z, sign: str = "-", rtol=1e-12) -> np.ndarray:
    """``q^-`` (or ``q^+``) from the projected resolvent, cross-checked by the ``h^`` form."""
    proj = P if sign == "-" else P.complement
    op, m = model.op, model.m
    z1 = op.z1
    sub = subspace_model(model, P, sign)
    # projected-resolvent form
    hm1 = sub.phi * op.weight(-(m + 1))
    cols = np.array([projected_resolvent(op, proj, v, z) for v in hm1])
    form1 = (z - z1) * sub.phi.conj() @ cols.T
    # h^ form with the h_0 picture of the projection
    Cm = scaled_projection(op, proj, m)
    hh = model.family.phi * op.weight(-(m + 2) / 2)
    R = hh / (op.eigenvalues - z)
    form2 = (z - z1) * hh.conj() @ (Cm @ hh.T) + (z - z1) ** 2 * hh.conj() @ (Cm @ R.T)
    scale = max(1.0, np.abs(form1).max())
    if np.abs(form1 - form2).max() > rtol * scale * 10:
        raise ArithmeticError("the two forms of the projected Q-function disagree")
    return form1


def subspace_M_eval(model: AModel, P: ReducingProjection, z, sign: str = "-") -> np.ndarray:
    return q_pm_eval(model, P, z, sign) + r_eval(model, z)


def additivity_residual(model: AModel, P: ReducingProjection, z) -> float:
    """``|| q^- + q^+ - q ||_max``."""
    q = q_eval(model, z)
    return float(np.abs(q_pm_eval(model, P, z, "-") + q_pm_eval(model, P, z, "+") - q).max())


def corollary_q_residual(model: AModel, z, c) -> float:
    """``|| Gamma1 f - q(z) c ||`` on the ``h_m``-level eigenvector.

    Here ``Gamma1(fsharp + h_{m+1}(c)) = <phi, fsharp>``, with no ``C^{md}`` part.
    """
    op = model.op
    if z == op.z1:
        raise ValueError("z = z1 is excluded")
    op.check_resolvent_point(z)
    c = np.asarray(c, dtype=complex)
    fsharp = (z - op.z1) * model.h(c) / (op.eigenvalues - z)
    gamma1 = model.phi.conj() @ fsharp
    return float(np.linalg.norm(gamma1 - q_eval(model, z) @ c))
