import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amodel.operator_model import (
    PoleError,
    ScaleVector,
    SingularFamily,
    SpectralOperator,
    TailRule,
    apply_bn,
    classify_order,
    duality,
    h_vector,
    inner_n,
    resolvent_apply,
)

OP12 = SpectralOperator(np.array([1.0, 2.0]), 0.0)


def test_operator_validation():
    with pytest.raises(ValueError):
        SpectralOperator(np.array([2.0, 1.0]), 0.0)
    with pytest.raises(ValueError):
        SpectralOperator(np.array([1.0, 2.0]), 1.0)
    with pytest.raises(ValueError):
        SpectralOperator(np.array([]), 0.0)
    op = SpectralOperator.from_multiplicities([(2.0, 2), (1.0, 1)], -1)
    assert op.eigenvalues.tolist() == [1.0, 2.0, 2.0]
    assert [g.tolist() for g in op.multiplicities()] == [[0], [1, 2]]


def test_apply_bn_examples():
    v = ScaleVector([1, 1], 0)
    same = apply_bn(OP12, v, 0)
    assert np.array_equal(same.coords, v.coords) and same.scale_index == 0
    assert np.allclose(apply_bn(OP12, v, 1).coords, [1, 2])
    half = apply_bn(OP12, v, -0.5)
    assert np.allclose(half.coords, [1, 1 / math.sqrt(2)], atol=1e-15)
    assert half.scale_index == 1


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 31))
def test_apply_bn_composes(s, t, seed):
    rng = np.random.default_rng(seed)
    op = SpectralOperator(np.sort(rng.uniform(0.5, 20, 6)), 0.0)
    v = ScaleVector(rng.standard_normal(6) + 1j * rng.standard_normal(6), 0)
    lhs = apply_bn(op, apply_bn(op, v, s), t)
    rhs = apply_bn(op, v, s + t)
    assert np.allclose(lhs.coords, rhs.coords, rtol=1e-13, atol=0)
    assert lhs.scale_index == pytest.approx(rhs.scale_index)


def test_inner_n():
    assert inner_n(OP12, ScaleVector([1, 0]), ScaleVector([1, 0]), 0) == 1
    assert inner_n(OP12, ScaleVector([1, 1]), ScaleVector([1, 1]), 2) == 5
    rng = np.random.default_rng(0)
    u = ScaleVector(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    w = ScaleVector(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    assert inner_n(OP12, u, w, 1.5) == pytest.approx(np.conj(inner_n(OP12, w, u, 1.5)))
    with pytest.raises(ValueError):
        inner_n(OP12, ScaleVector([1]), w, 0)


def test_resolvent():
    v = ScaleVector([1, 1])
    assert np.allclose(resolvent_apply(OP12, v, 0).coords, [1, 0.5])
    r = resolvent_apply(OP12, v, 0.3 + 2j)
    assert np.allclose((OP12.eigenvalues - (0.3 + 2j)) * r.coords, v.coords, rtol=0, atol=1e-15)
    assert np.linalg.norm(resolvent_apply(OP12, v, 1e9j).coords) < 1e-8
    with pytest.raises(PoleError):
        resolvent_apply(OP12, v, 2.0)


def test_h_vector_and_duality():
    fam = SingularFamily(np.array([[1.0, 1.0]]), 1)
    assert np.allclose(h_vector(OP12, fam, 0, 0).coords, [1, 1])
    assert np.allclose(h_vector(OP12, fam, 0, 1).coords, [1, 0.5])
    # one more power equals a resolvent at z1
    nxt = resolvent_apply(OP12, h_vector(OP12, fam, 0, 1), OP12.z1)
    assert np.allclose(h_vector(OP12, fam, 0, 2).coords, nxt.coords)
    assert duality(ScaleVector([1, 1]), ScaleVector([1, -1])) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31))
def test_pairing_through_h_m(m, seed):
    rng = np.random.default_rng(seed)
    op = SpectralOperator(np.sort(rng.uniform(0.5, 10, 8)), -0.2)
    fam = SingularFamily(rng.standard_normal((1, 8)) + 0j, m)
    f = ScaleVector(rng.standard_normal(8) + 1j * rng.standard_normal(8), m)
    lhs = duality(fam.vector(0), f)
    rhs = inner_n(op, h_vector(op, fam, 0, m + 1), apply_bn(op, f, 1), m)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_family_validation():
    with pytest.raises(ValueError):
        SingularFamily(np.ones((2, 3)), 2)
    with pytest.raises(ValueError):
        SingularFamily(np.ones((2, 4)), 1)
    with pytest.raises(ValueError):
        SingularFamily(np.ones((1, 4)), 0)


def test_classify_order():
    assert classify_order(TailRule(2, 0)).n_star == 1
    assert classify_order(TailRule(2, 0)).threshold == 0.5
    assert classify_order(TailRule(2, 1)).n_star == 2
    assert classify_order(TailRule(2, -np.inf)).n_star == 0
    rep = classify_order(TailRule(1 / 3, 0))
    assert rep.n_star == 4
    # increments per doubling of the truncation: constant (log growth) at n*-1,
    # geometrically shrinking at n*
    d_div = np.diff(rep.partial_sums[3])
    d_conv = np.diff(rep.partial_sums[4])
    assert d_div[-1] / d_div[0] > 0.9
    assert d_conv[-1] / d_conv[0] < 0.5
    with pytest.raises(ValueError):
        TailRule(0, 1)
