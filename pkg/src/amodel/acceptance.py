"""The nine acceptance checks, runnable from the CLI and from pytest.

Each check returns a :class:`Criterion` with the worst observed error next to
its threshold, so a failing run says by how much it failed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    AModel,
    admissible_dimension,
    build_jordan,
    commutator_map,
    hermitian_coords,
    jordan_resolvent_entry,
    make_model,
    corner_pattern_dimension,
    sample_admissible_gram,
    validate_gram,
)
from .operator_model import SingularFamily, SpectralOperator
from .rashba import (
    PREFACTOR_DENOM,
    RashbaParams,
    besselK,
    besselK_quadrature,
    build_discretized_example,
    gram_element_closed,
    gram_element_limit,
)
from .subspace import (
    ReducingProjection,
    additivity_residual,
    corollary_q_residual,
    subspace_model,
)
from .weyl import (
    M_eval,
    RelationParam,
    extension_eigenvalues,
    gamma_state,
    krein_naimark,
    q_alt_eval,
    q_eval,
    r_eval,
    solve_extension,
    spectrum_scan,
)


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    worst: float
    threshold: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = "".join(f" {k}={v}" for k, v in self.details.items())
        return f"[{status}] criterion {self.number}: {self.name} worst={self.worst:.3e} threshold={self.threshold:.1e}{extra}"


def _cvec(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_model(rng, m, d, N=None, *, degenerate=False) -> AModel:
    """Random admissible model with well separated eigenvalues below 10."""
    if N is None:
        N = int(rng.integers(m * d, max(m * d, 12) + 1))
    if degenerate:
        levels = max(1, N // 2)
        lam = np.sort(rng.choice(np.arange(1, 3 * levels + 1), size=levels, replace=False)).astype(float)
        mult = rng.integers(1, 4, size=levels)
        lam = np.repeat(lam, mult)
        if lam.size < m * d:
            lam = np.concatenate([lam, lam[-1] + 1 + np.arange(m * d - lam.size)])
    else:
        lam = np.sort(rng.uniform(0.0, 10.0, N))
    z1 = float(lam[0] - rng.uniform(0.5, 2.0))
    op = SpectralOperator(lam, z1)
    fam = SingularFamily(_cvec(rng, d, op.dim), m)
    return make_model(op, fam, seed=int(rng.integers(2 ** 31)))


def _random_z(rng, model, imag_min=0.2):
    x = rng.uniform(model.op.eigenvalues[0] - 2, model.op.eigenvalues[-1] + 2)
    y = rng.uniform(imag_min, 3.0) * rng.choice([-1, 1])
    return complex(x, y)


def _random_pair(rng, model):
    from .core import Pair
    f = _cvec(rng, model.N)
    if model.basis is not None:
        f = model.basis @ (model.basis.conj().T @ f)
    return Pair(f, _cvec(rng, model.m * model.d))


# ---------------------------------------------------------------------------

def criterion_green(seed=1, trials=100, rtol=1e-10, control_floor=1e-6) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        N = int(rng.integers(m * d, 65))
        model = random_model(rng, m, d, N)
        s1, s2 = model.random_state(rng), model.random_state(rng)
        worst = max(worst, model.green_residual(s1, s2) / model.green_scale(s1, s2))
    # negative control: G = I is not admissible at m = 2
    op = SpectralOperator(np.linspace(1, 6, 8), 0.0)
    fam = SingularFamily(_cvec(rng, 1, 8), 2)
    gram = validate_gram(np.eye(2), build_jordan(2, 1, 0.0))
    bad = AModel(op, fam, gram, require_admissible=False)
    control = max(bad.green_residual(bad.random_state(rng), bad.random_state(rng)) for _ in range(5))
    ok = worst <= rtol and control >= control_floor
    return Criterion(1, "Green identity", ok, worst, rtol, {"control": f"{control:.3e}"})


def criterion_krein(seed=2, trials=50, sub_trials=10, rtol=1e-8) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m, d = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        model = random_model(rng, m, d)
        theta = RelationParam.random_self_adjoint(d, rng)
        y, z = _random_pair(rng, model), _random_z(rng, model)
        a = krein_naimark(model, y, z, theta).flat()
        b = solve_extension(model, y, z, theta).flat()
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(b))
    worst_sub = 0.0
    for _ in range(sub_trials):
        m, d = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        model = random_model(rng, m, d, 10, degenerate=True)
        P = ReducingProjection.random(model.op, rng)
        sub = subspace_model(model, P)
        theta = RelationParam.random_self_adjoint(d, rng)
        y, z = _random_pair(rng, sub), _random_z(rng, sub)
        a = krein_naimark(sub, y, z, theta).flat()
        b = solve_extension(sub, y, z, theta).flat()
        worst_sub = max(worst_sub, np.linalg.norm(a - b) / np.linalg.norm(b))
    w = max(worst, worst_sub)
    return Criterion(2, "Krein-Naimark vs dense oracle", w <= rtol, w, rtol,
                     {"full": f"{worst:.3e}", "subspace": f"{worst_sub:.3e}"})


def criterion_jordan(seed=3, points=20, tol=1e-12) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for m in range(1, 7):
        z1 = float(rng.uniform(-2, 0))
        B = build_jordan(m, 1, z1).entries
        for _ in range(points):
            z = complex(z1 + rng.uniform(1, 3) * rng.choice([-1, 1]), rng.uniform(-2, 2))
            R = np.linalg.inv(B - z * np.eye(m))
            for j in range(1, m + 1):
                exact = jordan_resolvent_entry(m, z1, j, z)
                worst = max(worst, abs(R[j - 1, m - 1] - exact) / max(1.0, abs(exact)))
    return Criterion(3, "Jordan resolvent column", worst <= tol, worst, tol)


def criterion_weyl(seed=4, trials=50, tol_gamma=1e-11, tol_sym=1e-12) -> Criterion:
    rng = np.random.default_rng(seed)
    w_gamma = w_sym = w_alt = 0.0
    for _ in range(trials):
        m, d = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        model = random_model(rng, m, d)
        z = _random_z(rng, model)
        c = _cvec(rng, d)
        s = M_eval(model, z)
        lhs = s.M @ c
        rhs = model.gamma1(gamma_state(model, z, c))
        w_gamma = max(w_gamma, np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(lhs)))
        sc = M_eval(model, np.conj(z))
        for A, B in ((sc.M, s.M), (sc.q, s.q), (sc.r, s.r)):
            w_sym = max(w_sym, np.abs(A - B.conj().T).max() / max(1.0, np.abs(B).max()))
        qa = q_alt_eval(model, z)
        w_alt = max(w_alt, np.abs(qa - s.q).max() / max(1.0, np.abs(s.q).max()))
    ok = w_gamma <= tol_gamma and w_sym <= tol_sym and w_alt <= tol_sym
    # the three checks have different thresholds; report the worst error/threshold ratio
    ratio = max(w_gamma / tol_gamma, w_sym / tol_sym, w_alt / tol_sym)
    return Criterion(4, "Weyl function identities (error/threshold)", ok, ratio, 1.0,
                     {"gamma": f"{w_gamma:.3e}", "symmetry": f"{w_sym:.3e}", "q_alt": f"{w_alt:.3e}"})


def demo_split_models(seed=5):
    """The two split demos: ``(1,1,2,2)`` with rank-one mixings, and the spin ``C^1 (+) C^3`` cut."""
    rng = np.random.default_rng(seed)
    out = []
    op = SpectralOperator(np.array([1.0, 1.0, 2.0, 2.0]), 0.0)
    fam = SingularFamily(_cvec(rng, 2, 4), 1)
    model = make_model(op, fam, seed=seed)
    th = math.pi / 5
    U = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]], dtype=complex)
    P = ReducingProjection.from_blocks(op, [([0, 1], U, 1), ([2, 3], U.conj(), 1)])
    out.append(("lambda=(1,1,2,2)", model, P))
    op2, fam2 = build_discretized_example(8, m=2, d=4)
    model2 = make_model(op2, fam2, seed=seed)
    P2 = ReducingProjection.diagonal(op2.dim, [i for i in range(op2.dim) if i % 4 == 0])
    out.append(("spin C1+C3", model2, P2))
    return out


def criterion_additivity(seed=5, points=20, random_projections=10, tol=1e-12) -> Criterion:
    rng = np.random.default_rng(seed)
    cases = demo_split_models(seed)
    for _ in range(random_projections):
        m, d = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        model = random_model(rng, m, d, 10, degenerate=True)
        cases.append(("random", model, ReducingProjection.random(model.op, rng)))
    worst = 0.0
    for _, model, P in cases:
        for _ in range(points):
            z = _random_z(rng, model)
            scale = max(1.0, np.abs(q_eval(model, z)).max())
            worst = max(worst, additivity_residual(model, P, z) / scale)
    return Criterion(5, "Additivity q = q- + q+", worst <= tol, worst, tol, {"cases": len(cases)})


def criterion_spectrum(seed=6, taus=25, tol=1e-8) -> Criterion:
    rng = np.random.default_rng(seed)
    lam = np.array([1.0, 2.5, 4.0, 6.0, 7.5])
    op = SpectralOperator(lam, 0.0)
    fam = SingularFamily(_cvec(rng, 1, lam.size), 1)
    model = make_model(op, fam, G=np.array([[1.0]]))
    a, b = -6.0, 10.0
    worst, count = 0.0, 0
    for tau in np.linspace(-4, 4, taus):
        theta = RelationParam(np.eye(1), tau * np.eye(1))
        found = spectrum_scan(model, theta, a, b).values
        ev = extension_eigenvalues(model, theta)
        ev = np.sort(ev[(np.abs(ev.imag) < 1e-8) & (ev.real > a) & (ev.real < b)].real)
        if found.size != ev.size:
            worst = max(worst, np.inf)
            continue
        if ev.size:
            worst = max(worst, np.abs(found - ev).max())
        count += ev.size
    return Criterion(6, "Spectrum scan vs pencil eigenvalues", worst <= tol, worst, tol, {"roots": count})


def criterion_rashba(seed=7, pairs=10, tol=1e-4, tol_bessel=1e-12, tol_coinc=1e-8) -> Criterion:
    rng = np.random.default_rng(seed)
    p = RashbaParams(1.0, 1.0, 2.0)
    base = abs(gram_element_limit(p) / gram_element_closed(p) - 1)
    w_limit = base
    for _ in range(pairs):
        a1, a2 = rng.uniform(0.5, 5, 2)
        q = RashbaParams(1.0, a1, a2)
        w_limit = max(w_limit, abs(gram_element_limit(q) / gram_element_closed(q) - 1))
    w_bessel = 0.0
    for x in np.logspace(-6, math.log10(50), 50):
        for nu in (0, 1, 2):
            ref = besselK_quadrature(nu, x)
            w_bessel = max(w_bessel, abs(besselK(nu, x) - ref) / ref)
    w_coinc = 0.0
    for a1 in (0.5, 1.0, 3.0):
        target = 1.0 / (PREFACTOR_DENOM * 3 * a1)
        for eps in (1e-9, -1e-9):
            val = gram_element_closed(RashbaParams(1.0, a1, a1 * (1 + eps)))
            w_coinc = max(w_coinc, abs(val / target - 1))
    ok = w_limit <= tol and w_bessel <= tol_bessel and w_coinc <= tol_coinc
    return Criterion(7, "Rashba Gram element", ok, w_limit, tol,
                     {"value": f"{gram_element_closed(p):.6e}", "bessel": f"{w_bessel:.3e}", "coincidence": f"{w_coinc:.3e}"})


def criterion_gram(seed=8, samples=5) -> Criterion:
    worst_dim, worst_in = 0, 0.0
    strict = True
    for m in range(1, 5):
        for d in range(1, 4):
            dim = admissible_dimension(m, d)
            worst_dim = max(worst_dim, abs(dim - m * d * d))
            A, _ = commutator_map(m, d)
            for k in range(samples):
                G = sample_admissible_gram(m, d, seed=seed * 1000 + 10 * m + d + 100 * k).matrix
                v = hermitian_coords(G)
                worst_in = max(worst_in, np.linalg.norm(A @ v) / np.linalg.norm(v))
            corner = corner_pattern_dimension(m, d)
            if m >= 3 and not corner < dim:
                strict = False
    ok = worst_dim == 0 and worst_in <= 1e-12 and strict
    return Criterion(8, "Gram characterization", ok, worst_in, 1e-12,
                     {"dimension_mismatch": worst_dim, "corner_strict_subset_m>=3": strict})


def criterion_corollary(seed=9, trials=50, tol=1e-11) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m, d = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        model = random_model(rng, m, d)
        z = _random_z(rng, model)
        c = _cvec(rng, d)
        scale = max(1.0, np.linalg.norm(q_eval(model, z) @ c))
        worst = max(worst, corollary_q_residual(model, z, c) / scale)
    return Criterion(9, "h_m-level eigenstate gives q(z) c", worst <= tol, worst, tol)


CRITERIA = (
    criterion_green,
    criterion_krein,
    criterion_jordan,
    criterion_weyl,
    criterion_additivity,
    criterion_spectrum,
    criterion_rashba,
    criterion_gram,
    criterion_corollary,
)


def run_all(seed_offset: int = 0):
    results = []
    for k, fn in enumerate(CRITERIA):
        results.append(fn(seed=k + 1 + seed_offset))
    return results
