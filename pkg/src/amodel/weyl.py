"""Weyl function, gamma field and resolvents of proper extensions.

A linear relation ``Theta`` in ``C^d`` is given by a column pair ``(X, Y)``,
``Theta = {(X w, Y w)}``, so that ``(Theta - M)^-1 = X (Y - M X)^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import AModel, ModelState, Pair, eta, jordan_resolvent, top_slots
from .operator_model import PoleError

POLE_ZONE = 1e-6


class EigenvalueHit(ValueError):
    """``z`` is an eigenvalue of the extension (or ``Theta`` is degenerate there)."""


@dataclass(frozen=True)
class RelationParam:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=complex))
        Y = np.atleast_2d(np.asarray(self.Y, dtype=complex))
        if X.shape != Y.shape or X.shape[0] != X.shape[1]:
            raise ValueError("X and Y must be square of equal size")
        if np.linalg.matrix_rank(np.vstack([X, Y])) < X.shape[1]:
            raise ValueError("[X; Y] must have full column rank")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def d(self) -> int:
        return self.X.shape[0]

    @property
    def is_self_adjoint(self) -> bool:
        A = self.X.conj().T @ self.Y
        return bool(np.linalg.norm(A - A.conj().T) <= 1e-12 * max(1.0, np.linalg.norm(A)))

    @classmethod
    def a0(cls, d):
        """``{0} x C^d``: the distinguished extension."""
        return cls(np.zeros((d, d)), np.eye(d))

    @classmethod
    def transversal(cls, d):
        return cls(np.eye(d), np.zeros((d, d)))

    @classmethod
    def graph(cls, T):
        T = np.atleast_2d(np.asarray(T, dtype=complex))
        return cls(np.eye(T.shape[0]), T)

    @classmethod
    def random_self_adjoint(cls, d, rng):
        """Random Lagrangian pair built from a random unitary ``K``."""
        A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        K, _ = np.linalg.qr(A)
        I = np.eye(d)
        return cls(I - K, 1j * (I + K))

    def contains(self, a, b, tol=1e-10) -> float:
        """Residual of projecting ``(a, b)`` onto the column space of ``[X; Y]``."""
        Q, _ = np.linalg.qr(np.vstack([self.X, self.Y]))
        v = np.concatenate([a, b])
        return float(np.linalg.norm(v - Q @ (Q.conj().T @ v)) / max(1.0, np.linalg.norm(v)))


@dataclass(frozen=True)
class WeylSample:
    z: complex
    q: np.ndarray
    r: np.ndarray
    M: np.ndarray


def _check_poles(model: AModel, z, *, z1_pole=True):
    model.op.check_resolvent_point(z)
    if z1_pole and z == model.op.z1:
        raise PoleError("z equals the model parameter z1")


def q_eval(model: AModel, z) -> np.ndarray:
    """Krein Q-function ``(z-z1) <phi_s, (L-z)^-1 h_{s',m+1}>``."""
    _check_poles(model, z, z1_pole=False)
    op = model.op
    wts = op.weight(-(model.m + 1)) / (op.eigenvalues - z)
    return (z - op.z1) * (model.phi.conj() * wts) @ model.phi.T


def q_alt_eval(model: AModel, z) -> np.ndarray:
    """Same function via ``h^_s = b_{m+2}(L)^{-1/2} phi_s`` and the ``h_0`` product."""
    _check_poles(model, z, z1_pole=False)
    op = model.op
    hh = model.phi * op.weight(-(model.m + 2) / 2)
    w = z - op.z1
    return w * hh.conj() @ hh.T + w ** 2 * (hh.conj() / (op.eigenvalues - z)) @ hh.T


def r_eval(model: AModel, z) -> np.ndarray:
    """``-sum_j G[s m, s' j] / (z - z1)**(m-j+1)``."""
    z1, m, d = model.op.z1, model.m, model.d
    if z == z1:
        raise PoleError("z equals the model parameter z1")
    G = model.G
    out = np.zeros((d, d), dtype=complex)
    for j in range(1, m + 1):
        out -= G[m - 1 :: m, j - 1 :: m] / (z - z1) ** (m - j + 1)
    return out


def M_eval(model: AModel, z) -> WeylSample:
    q, r = q_eval(model, z), r_eval(model, z)
    return WeylSample(complex(z), q, r, q + r)


def gamma_state(model: AModel, z, c) -> ModelState:
    """Eigenvector of ``A_max`` at ``z`` with ``Gamma0 = c``."""
    _check_poles(model, z)
    c = np.asarray(c, dtype=complex)
    op = model.op
    fsharp = (z - op.z1) * model.h(c) / (op.eigenvalues - z)
    xi = -jordan_resolvent(model.jordan, z) @ eta(c, model.m)
    return ModelState(fsharp, c, xi)


def gamma_matrix(model: AModel, z):
    """States ``gamma(z) e_sigma`` for the unit vectors of ``C^d``."""
    return [gamma_state(model, z, e) for e in np.eye(model.d)]


def gamma_adjoint(model: AModel, w, y: Pair) -> np.ndarray:
    """``gamma(w)^+ y`` with respect to the indefinite model metric."""
    return np.array([model.pair_inner(model.embed(g), y) for g in gamma_matrix(model, w)])


def a0_resolvent(model: AModel, y: Pair, z) -> ModelState:
    """``(A0 - z)^-1 y``; the result lies in ``ker Gamma0``."""
    _check_poles(model, z)
    f = np.asarray(y.f, dtype=complex) / (model.op.eigenvalues - z)
    xi = jordan_resolvent(model.jordan, z) @ np.asarray(y.xi, dtype=complex)
    return ModelState(f, np.zeros(model.d), xi)


def minus_z(model: AModel, s: ModelState, z) -> Pair:
    """``(A_max - z) s`` as an element of ``h_m (+) C^{md}``."""
    a = model.amax_apply(s)
    e = model.embed(s)
    return Pair(a.f - z * e.f, a.xi - z * e.xi)


def krein_naimark(model: AModel, y: Pair, z, theta: RelationParam) -> ModelState:
    """Resolvent of ``A_Theta`` via the Krein-Naimark formula."""
    x0 = a0_resolvent(model, y, z)
    M = M_eval(model, z).M
    W = theta.Y - M @ theta.X
    s = np.linalg.svd(W, compute_uv=False)
    if s[-1] <= 1e-13 * max(1.0, s[0]):
        raise EigenvalueHit(f"Y - M(z) X is singular at z={z}")
    u = theta.X @ np.linalg.solve(W, gamma_adjoint(model, np.conj(z), y))
    return x0 + gamma_state(model, z, u)


# brute-force route: the boundary-value problem as one dense system -------------

def _basis(model: AModel):
    return np.eye(model.N, dtype=complex) if model.basis is None else model.basis


def boundary_pencil(model: AModel, theta: RelationParam):
    """Matrices ``(S0, S1)`` with ``(A_Theta - z) x = y`` equivalent to ``(S0 - z S1) u = rhs``.

    Unknowns ``u = (a, w, xi)`` with ``fsharp = V a`` and ``c = X w``.
    """
    V = _basis(model)
    r, d, md = V.shape[1], model.d, model.m * model.d
    lam, z1 = model.op.eigenvalues, model.op.z1
    H = (model.phi * model.op.weight(-(model.m + 1))).T  # N x d, h_{m+1}(c) = H c
    E = np.zeros((md, d))
    E[model.m - 1 :: model.m, :] = np.eye(d)
    Gm = model.G[model.m - 1 :: model.m, :]
    Vh = V.conj().T
    n = r + d + md
    S0 = np.zeros((n, n), dtype=complex)
    S1 = np.zeros((n, n), dtype=complex)
    i1, i2 = slice(0, r), slice(r, r + d)
    i3 = slice(r + d, n)
    rows_f, rows_xi, rows_b = slice(0, r), slice(r, r + md), slice(r + md, n)
    S0[rows_f, i1] = Vh @ (lam[:, None] * V)
    S1[rows_f, i1] = np.eye(r)
    S0[rows_f, i2] = z1 * Vh @ H @ theta.X
    S1[rows_f, i2] = Vh @ H @ theta.X
    S0[rows_xi, i2] = E @ theta.X
    S0[rows_xi, i3] = model.jordan.entries
    S1[rows_xi, i3] = np.eye(md)
    S0[rows_b, i1] = model.phi.conj() @ V
    S0[rows_b, i2] = -theta.Y
    S0[rows_b, i3] = -Gm
    return S0, S1


def solve_extension(model: AModel, y: Pair, z, theta: RelationParam, *, sv_tol=1e-13) -> ModelState:
    """Solve ``(A_Theta - z) x = y`` directly, without M or gamma."""
    V = _basis(model)
    S0, S1 = boundary_pencil(model, theta)
    S = S0 - z * S1
    s = np.linalg.svd(S, compute_uv=False)
    if s[-1] <= sv_tol * s[0]:
        raise EigenvalueHit(f"boundary system singular at z={z}")
    rhs = np.concatenate([V.conj().T @ np.asarray(y.f, dtype=complex),
                          np.asarray(y.xi, dtype=complex), np.zeros(model.d)])
    u = np.linalg.solve(S, rhs)
    r, d = V.shape[1], model.d
    a, w, xi = u[:r], u[r : r + d], u[r + d :]
    return ModelState(V @ a, theta.X @ w, xi)


def boundary_min_singular(model: AModel, theta: RelationParam, z) -> float:
    """Smallest singular value of the oracle system, relative to the largest."""
    S0, S1 = boundary_pencil(model, theta)
    s = np.linalg.svd(S0 - z * S1, compute_uv=False)
    return float(s[-1] / s[0])


def extension_eigenvalues(model: AModel, theta: RelationParam, *, real_tol=1e-8) -> np.ndarray:
    """Finite eigenvalues of the oracle pencil, i.e. the eigenvalues of ``A_Theta``."""
    S0, S1 = boundary_pencil(model, theta)
    ev = scipy.linalg.eigvals(S0, S1)
    ev = ev[np.isfinite(ev)]
    return np.sort_complex(ev)


# spectrum scan ------------------------------------------------------------

def normalized_det(model: AModel, theta: RelationParam, z):
    """``det(Y - M(z) X)`` divided by a constant phase that makes it real on the real axis.

    For a self-adjoint pair the phase is ``i^d det(X - iY) sqrt(det K)`` with
    the Cayley transform ``K = -(X + iY)(X - iY)^-1``.
    """
    X, Y, d = theta.X, theta.Y, theta.d
    raw = np.linalg.det(Y - M_eval(model, z).M @ X)
    R = X - 1j * Y
    K = -(X + 1j * Y) @ np.linalg.inv(R)
    phase = (1j ** d) * np.linalg.det(R) * np.sqrt(complex(np.linalg.det(K)))
    return raw / phase, raw


@dataclass
class ScanResult:
    roots: list = field(default_factory=list)  # (value, |det|) pairs
    flagged: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([r[0] for r in self.roots])


def pole_set(model: AModel) -> np.ndarray:
    return np.unique(np.append(model.op.eigenvalues, model.op.z1))


def spectrum_scan(model: AModel, theta: RelationParam, a: float, b: float, n: int = 2000,
                  *, xtol: float = 1e-10, zone: float = POLE_ZONE, merge: float = 1e-8) -> ScanResult:
    """Real eigenvalues of ``A_Theta`` in ``[a, b]`` from sign changes of the normalized det."""
    if not theta.is_self_adjoint:
        raise ValueError("spectrum_scan needs a self-adjoint Theta")

    def F(x):
        return normalized_det(model, theta, x)[0].real

    poles = pole_set(model)
    inner = poles[(poles > a) & (poles < b)]
    edges = np.concatenate([[a], inner, [b]])
    result = ScanResult()
    found = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        lo_z = lo + zone if np.any(np.abs(poles - lo) < zone) else lo
        hi_z = hi - zone if np.any(np.abs(poles - hi) < zone) else hi
        if hi_z <= lo_z:
            continue
        k = max(8, int(n * (hi - lo) / (b - a)))
        grid = np.linspace(lo_z, hi_z, k)
        vals = np.array([F(x) for x in grid])
        for x0, x1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if f0 == 0:
                found.append(x0)
                continue
            if np.sign(f0) == np.sign(f1):
                continue
            root = _bisect(F, x0, x1, f0, xtol)
            root = _secant_polish(F, root, x0, x1)
            if np.min(np.abs(poles - root)) < zone:
                result.flagged.append(root)
            else:
                found.append(root)
    for x in sorted(found):
        if result.roots and abs(x - result.roots[-1][0]) < merge:
            continue
        raw = normalized_det(model, theta, x)[1]
        result.roots.append((float(x), float(abs(raw))))
    return result


def _bisect(F, lo, hi, flo, xtol):
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = F(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _secant_polish(F, x, lo, hi, steps=2):
    h = max(1e-9, 1e-9 * abs(x))
    for _ in range(steps):
        fx = F(x)
        df = (F(x + h) - F(x - h)) / (2 * h)
        if df == 0 or not np.isfinite(df):
            break
        x_new = x - fx / df
        if not lo <= x_new <= hi or abs(F(x_new)) > abs(fx):
            break
        x = x_new
    return x
