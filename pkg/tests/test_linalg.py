import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from twistor_eta import linalg
from twistor_eta.linalg import (endo_to_wedge, gram_schmidt, interior_product, polarize,
                                random_orthogonal, trace_metric, unit_bivector, wedge_to_endo)

from conftest import skew

# squares of tiny entries underflow to zero
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False).filter(lambda v: v == 0 or abs(v) > 1e-100)


def test_trace_metric_examples():
    assert trace_metric(skew(3, 1, 3), skew(3, 1, 3)) == pytest.approx(1.0)
    assert trace_metric(skew(3, 1, 3), np.zeros((3, 3))) == 0.0
    assert trace_metric(skew(3, 1, 2), skew(3, 1, 3)) == pytest.approx(0.0)


def test_trace_metric_dimension_mismatch():
    with pytest.raises(linalg.DimensionError):
        trace_metric(np.zeros((3, 3)), np.zeros((5, 5)))


def test_wedge_endo_convention():
    A = wedge_to_endo(unit_bivector(3, 0, 2))
    np.testing.assert_array_equal(A, skew(3, 1, 3))
    np.testing.assert_array_equal(A @ [1, 0, 0], [0, 0, 1])
    np.testing.assert_array_equal(A @ [0, 0, 1], [-1, 0, 0])
    assert np.linalg.norm(unit_bivector(3, 0, 2)) == 1.0


def test_wedge_of_vectors_matches_determinant_inner_product(rng):
    x1, x2, x3, x4 = rng.standard_normal((4, 5))
    lhs = linalg.bivector_inner(linalg.wedge(x1, x2), linalg.wedge(x3, x4))
    rhs = (x1 @ x3) * (x2 @ x4) - (x1 @ x4) * (x2 @ x3)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_defining_identity(rng):
    n = 5
    w = rng.standard_normal(linalg.bivector_dim(n))
    A = wedge_to_endo(w)
    X, Y = rng.standard_normal((2, n))
    assert (A @ X) @ Y == pytest.approx(w @ linalg.wedge(X, Y), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 9).flatmap(lambda n: arrays(float, n * (n - 1) // 2, elements=finite)))
def test_round_trip_and_isometry(w):
    A = wedge_to_endo(w)
    np.testing.assert_allclose(endo_to_wedge(A), w, atol=1e-12)
    assert trace_metric(A, A) == pytest.approx(w @ w, rel=1e-12, abs=1e-12)
    if np.any(w):
        assert trace_metric(A, A) > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 7).flatmap(lambda n: st.tuples(
    arrays(float, n, elements=finite), arrays(float, n, elements=finite),
    arrays(float, n * (n - 1) // 2, elements=finite))))
def test_interior_product_is_skew(args):
    X, Y, w = args
    assert interior_product(X, w) @ Y == pytest.approx(-(interior_product(Y, w) @ X), abs=1e-9)


def test_interior_product_examples():
    w = unit_bivector(3, 0, 2)
    np.testing.assert_array_equal(interior_product([1, 0, 0], w), [0, 0, 1])
    np.testing.assert_array_equal(interior_product([0, 1, 0], w), [0, 0, 0])
    np.testing.assert_array_equal(interior_product([0, 0, 1], w), [-1, 0, 0])


def test_interior_product_bilinear(rng):
    X1, X2 = rng.standard_normal((2, 5))
    w1, w2 = rng.standard_normal((2, 10))
    lhs = interior_product(2 * X1 - X2, 3 * w1 + w2)
    rhs = (6 * interior_product(X1, w1) + 2 * interior_product(X1, w2)
           - 3 * interior_product(X2, w1) - interior_product(X2, w2))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_polarize(rng):
    q = lambda v: float(v @ v)
    E, F = rng.standard_normal((2, 6))
    assert polarize(q, E, F) == pytest.approx(E @ F)
    assert polarize(q, E, E) == pytest.approx(q(E))


def test_random_orthogonal_deterministic():
    Q = random_orthogonal(3, 7)
    np.testing.assert_allclose(Q.T @ Q, np.eye(3), atol=1e-12)
    np.testing.assert_array_equal(Q, random_orthogonal(3, 7))


def test_gram_schmidt():
    np.testing.assert_array_equal(gram_schmidt(np.eye(4)), np.eye(4))
    Q = random_orthogonal(5, 1)
    np.testing.assert_allclose(gram_schmidt(Q), Q, atol=1e-12)
    P = Q + 0.1 * np.triu(np.ones((5, 5)))
    F = gram_schmidt(P)
    np.testing.assert_allclose(F.T @ F, np.eye(5), atol=1e-12)
    with pytest.raises(linalg.DegenerateFrameError):
        gram_schmidt(np.ones((3, 3)))


def test_gram_schmidt_with_metric(rng):
    Z = rng.standard_normal((4, 4))
    g = Z @ Z.T + 4 * np.eye(4)
    F = gram_schmidt(np.eye(4), g)
    np.testing.assert_allclose(F.T @ g @ F, np.eye(4), atol=1e-12)
