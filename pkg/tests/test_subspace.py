import numpy as np
import pytest

from amodel.acceptance import demo_split_models, random_model
from amodel.core import IllConditionedError, ModelState, Pair, ProjectionError, eta
from amodel.operator_model import SingularFamily, SpectralOperator
from amodel.core import make_model
from amodel.rashba import build_discretized_example
from amodel.subspace import (
    ReducingProjection,
    additivity_residual,
    corollary_q_residual,
    eta_pm,
    gram_tilde_split,
    projected_resolvent,
    q_pm_eval,
    scaled_projection,
    sigma_kernel,
    spir_residual,
    split_functionals,
    subspace_M_eval,
    subspace_model,
)
from amodel.weyl import M_eval, RelationParam, gamma_state, krein_naimark, q_eval, r_eval, solve_extension

OP1122 = SpectralOperator(np.array([1.0, 1.0, 2.0, 2.0]), -1.0)


def cvec(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_projection_validation():
    n = OP1122.dim
    ReducingProjection(np.eye(n)).check(OP1122)
    with pytest.raises(ProjectionError):
        ReducingProjection(np.ones((n, n)) / n).check(OP1122)  # mixes distinct eigenvalues
    with pytest.raises(ProjectionError):
        ReducingProjection(2 * np.eye(n)).check(OP1122)
    with pytest.raises(ProjectionError):
        ReducingProjection(np.eye(3)).check(OP1122)
    with pytest.raises(ProjectionError):
        ReducingProjection.from_blocks(OP1122, [([1, 2], np.eye(2), 1)])


def test_projected_resolvent_examples():
    n = OP1122.dim
    op0 = SpectralOperator(OP1122.eigenvalues, -1.0)
    v = np.array([1.0, 0, 1.0, 0])
    P = ReducingProjection.diagonal(n, [0, 2])
    assert np.allclose(projected_resolvent(op0, P, v, 0.0), [1, 0, 0.5, 0])
    w = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(projected_resolvent(op0, ReducingProjection(np.eye(n)), w, 0.5j), w / (op0.eigenvalues - 0.5j))
    assert np.all(projected_resolvent(op0, ReducingProjection(np.zeros((n, n))), w, 0.5j) == 0)


def test_random_projection_is_reducing(rng):
    P = ReducingProjection.random(OP1122, rng)
    P.check(OP1122)
    B = P.basis()
    assert B.shape[1] == P.rank
    assert np.allclose(B.conj().T @ B, np.eye(P.rank))


@pytest.fixture
def model(rng):
    return random_model(rng, 2, 2, 10, degenerate=True)


def test_split_identity(model):
    I = ReducingProjection(np.eye(model.N))
    split = split_functionals(model, I)
    assert np.allclose(split.phi_minus, model.phi) and np.allclose(split.phi_plus, 0)
    c = np.array([1.0, -2j])
    assert np.allclose(eta_pm(model, split, c, "-"), eta(c, 2))
    assert np.allclose(eta_pm(model, split, c, "+"), 0, atol=1e-12)
    z = 3.0 + 1j
    assert np.allclose(q_pm_eval(model, I, z, "-"), q_eval(model, z))
    assert np.allclose(q_pm_eval(model, I, z, "+"), 0)
    assert np.allclose(subspace_M_eval(model, I, z), M_eval(model, z).M)


def test_split_consistency(model, rng):
    P = ReducingProjection.random(model.op, rng)
    C = scaled_projection(model.op, P, model.m + 2)
    assert np.linalg.norm(model.phi @ C.T - model.phi @ P.P.T) < 1e-12
    split = split_functionals(model, P)
    for _ in range(100):
        f = P.P @ cvec(rng, model.N)
        assert spir_residual(model, split, f) < 1e-12 * max(1, np.linalg.norm(f) * np.linalg.norm(model.phi))


def test_eta_additivity(model, rng):
    P = ReducingProjection.random(model.op, rng)
    split = split_functionals(model, P)
    for _ in range(10):
        c = cvec(rng, 2)
        total = eta_pm(model, split, c, "-") + eta_pm(model, split, c, "+")
        assert np.allclose(total, eta(c, 2), atol=1e-12)
    assert np.all(eta_pm(model, split, np.zeros(2), "-") == 0)
    Gt, Gm, Gp = gram_tilde_split(model, split)
    assert np.allclose(Gm + Gp, Gt, atol=1e-14)


def test_sigma_kernel(rng):
    op = SpectralOperator(np.array([1.0, 1.0, 3.0, 3.0, 5.0]), 0.0)
    phi = np.array([[1.0, 0, 2.0, 0, 1.0], [0, 1.0, 0, 2.0, 1.0]])
    model = make_model(op, SingularFamily(phi, 1), seed=1)
    # phi-_1 = phi-_2 after projection onto the last coordinate
    P = ReducingProjection.diagonal(5, [4])
    split = split_functionals(model, P)
    ns, mul = sigma_kernel(model, split, "-")
    assert ns.shape == (2, 1)
    assert np.allclose(abs(ns[:, 0] / ns[0, 0]), [1, 1]) and ns[1, 0] / ns[0, 0] == pytest.approx(-1)
    assert mul.shape == (2, 1)
    rank = np.linalg.matrix_rank(split.phi_minus)
    assert ns.shape[1] + rank == model.d
    ns_full, mul_full = sigma_kernel(model, split_functionals(model, ReducingProjection(np.eye(5))))
    assert ns_full.shape[1] == 0 and mul_full.shape == (2, 0)


def test_additivity_demos():
    for name, model, P in demo_split_models():
        P.check(model.op)
        for z in (-0.3 + 0.2j, 1.5 - 1j, 7.0 + 3j, 0.2j):
            assert additivity_residual(model, P, z) < 1e-12, name


def test_r_is_projection_independent(model, rng):
    P = ReducingProjection.random(model.op, rng)
    z = 0.4 + 0.9j
    Mm = subspace_M_eval(model, P, z, "-")
    assert np.allclose(Mm - q_pm_eval(model, P, z, "-"), r_eval(model, z))
    Mp = subspace_M_eval(model, P, z, "+")
    assert np.allclose(Mp - q_pm_eval(model, P, z, "+"), r_eval(model, z))


def test_subspace_model_boundary_triple(model, rng):
    P = ReducingProjection.random(model.op, rng)
    sub = subspace_model(model, P)
    for _ in range(100):
        s1, s2 = sub.random_state(rng), sub.random_state(rng)
        assert sub.green_residual(s1, s2) <= 1e-10 * sub.green_scale(s1, s2)
    c = cvec(rng, 2)
    only_c = ModelState(np.zeros(model.N), c, np.zeros(4))
    assert np.allclose(sub.gamma0(only_c), c) and np.allclose(sub.gamma1(only_c), 0)
    z = -0.2 + 0.8j
    g = gamma_state(sub, z, c)
    Mm = subspace_M_eval(model, P, z)
    assert np.linalg.norm(sub.gamma1(g) - Mm @ c) < 1e-11 * max(1, np.linalg.norm(Mm @ c))
    with pytest.raises(ProjectionError):
        sub.gamma1(ModelState((np.eye(model.N) - P.P) @ cvec(rng, model.N) + 1e-3, c, np.zeros(4)))


def test_subspace_min_domain(model, rng):
    P = ReducingProjection.random(model.op, rng)
    sub = subspace_model(model, P)
    xi = cvec(rng, 4)
    from amodel.core import top_slots
    pre = sub.boundary_preimage(np.zeros(2), top_slots(model.G @ xi, 2))
    s = ModelState(pre.fsharp, np.zeros(2), xi)
    assert np.linalg.matrix_rank(sub.phi @ P.basis()) == 2
    assert np.allclose(sub.gamma0(s), 0) and np.allclose(sub.gamma1(s), 0, atol=1e-10)


def test_subspace_krein_naimark(model, rng):
    for _ in range(5):
        P = ReducingProjection.random(model.op, rng)
        sub = subspace_model(model, P)
        theta = RelationParam.random_self_adjoint(2, rng)
        B = P.basis()
        y = Pair(B @ cvec(rng, B.shape[1]), cvec(rng, 4))
        z = complex(rng.uniform(-1, 10), rng.uniform(0.3, 2))
        a, b = krein_naimark(sub, y, z, theta), solve_extension(sub, y, z, theta)
        assert np.linalg.norm(a.flat() - b.flat()) <= 1e-8 * np.linalg.norm(b.flat())


def test_corollary(model, rng):
    for _ in range(50):
        z = complex(rng.uniform(-2, 10), rng.uniform(0.2, 2))
        c = cvec(rng, 2)
        assert corollary_q_residual(model, z, c) < 1e-11 * max(1, np.linalg.norm(q_eval(model, z) @ c))
    assert corollary_q_residual(model, 1j, np.zeros(2)) == 0
    with pytest.raises(ValueError):
        corollary_q_residual(model, model.op.z1, np.ones(2))


def test_rashba_spin_split():
    op, fam = build_discretized_example(12)
    model = make_model(op, fam, seed=3)
    P = ReducingProjection.diagonal(op.dim, [i for i in range(op.dim) if i % 4 == 0])
    for z in (-0.5j, 2 + 1j, 10 - 0.1j):
        assert additivity_residual(model, P, z) < 1e-12
    # C^1 (+) C^3: q- lives in the (0,0) corner, q+ in the 3x3 block
    qm = q_pm_eval(model, P, 2 + 1j, "-")
    assert np.allclose(qm[1:, :], 0) and np.allclose(qm[:, 1:], 0)


def test_ill_conditioned_split_raises():
    op = SpectralOperator(np.array([1.0, 2.0]), 0.0)
    phi = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]])
    model = make_model(op, SingularFamily(phi, 1), np.eye(2))
    split = split_functionals(model, ReducingProjection.diagonal(2, [0]))
    with pytest.raises(IllConditionedError):
        eta_pm(model, split, np.ones(2), "-")
