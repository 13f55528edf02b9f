import numpy as np
import pytest

from twistor_eta import contact_structures as cs
from twistor_eta import linalg

from conftest import skew


def test_canonical_structure():
    s3 = cs.canonical_structure(3)
    np.testing.assert_array_equal(s3.phi, skew(3, 1, 2))
    np.testing.assert_array_equal(s3.xi, [0, 0, 1])
    np.testing.assert_allclose(s3.phi @ s3.phi, -np.eye(3) + np.outer(s3.xi, s3.xi))
    s5 = cs.canonical_structure(5)
    np.testing.assert_array_equal(s5.phi, skew(5, 1, 2) + skew(5, 3, 4))
    np.testing.assert_array_equal(s5.xi, np.eye(5)[4])
    with pytest.raises(cs.StructureError):
        cs.canonical_structure(4)


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_random_structure_invariants(n):
    s = cs.random_structure(n, 3)
    s.check(1e-10)
    F = cs.covering_project(s)
    F.check()
    assert cs.structure_rank(F.F) == n - 1
    s2 = cs.random_structure(n, 3)
    assert s.phi.tobytes() == s2.phi.tobytes() and s.xi.tobytes() == s2.xi.tobytes()


def test_dimension_and_scalar_formulas():
    assert cs.fk_dimension(3, 1) == 2
    assert cs.fiber_scalar_curvature(3, 1) == 1
    assert cs.fiber_scalar_curvature(5, 2) == 6
    assert cs.fk_dimension(5, 2) == 6
    with pytest.raises(cs.StructureError):
        cs.fk_dimension(3, 2)


def test_tangency_examples():
    phi = skew(3, 1, 2)
    assert cs.is_tangent(skew(3, 1, 3), phi)
    assert not cs.is_tangent(skew(3, 1, 2), phi)
    # Q F^2 + F Q F + F^2 Q + Q at Q = phi is -phi - phi - phi + phi = -2 phi
    np.testing.assert_allclose(cs.tangency_residual(phi, phi), -2 * phi)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_tangent_dimension_by_rank(n):
    k = (n - 1) // 2
    s = cs.random_structure(n, 11)
    assert cs.tangent_dimension(s.phi) == k * k + k == cs.fk_dimension(n, k)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_two_tangency_forms_agree(n):
    phi = cs.random_structure(n, 5).phi
    P2 = linalg.operator_matrix(lambda Q: Q @ phi @ phi + phi @ phi @ Q + phi @ Q @ phi + Q, n)
    P1 = cs.tangency_matrix(phi)
    # same kernel: stacking does not raise the rank
    r = np.linalg.matrix_rank
    assert r(P1, 1e-8) == r(P2, 1e-8) == r(np.vstack([P1, P2]), 1e-8)


def test_tangent_project(rng):
    phi = cs.random_structure(5, 2).phi
    Q = linalg.random_skew(5, rng)
    P = cs.tangent_project(Q, phi)
    assert cs.is_tangent(P, phi)
    np.testing.assert_allclose(cs.tangent_project(P, phi), P, atol=1e-12)
    T = cs.random_tangent(phi, rng)
    np.testing.assert_allclose(cs.tangent_project(T, phi), T, atol=1e-12)
    # the residual is G-orthogonal to the tangent space
    assert linalg.trace_metric(Q - P, T) == pytest.approx(0, abs=1e-12)


def test_fiber_metric_examples(rng):
    phi = skew(3, 1, 2)
    assert cs.fiber_metric_h(skew(3, 1, 3), skew(3, 1, 3), phi) == pytest.approx(2.0)
    B = skew(3, 1, 3) / np.sqrt(2)
    assert cs.fiber_metric_h(B, B, phi) == pytest.approx(1.0)
    phi5 = cs.random_structure(5, 0).phi
    P, Q = cs.random_tangent(phi5, rng), cs.random_tangent(phi5, rng)
    assert cs.fiber_metric_h(P, Q, phi5) == pytest.approx(cs.fiber_metric_h(Q, P, phi5))
    assert cs.fiber_metric_h(P, P, phi5) > 0
    with pytest.raises(cs.NotTangentError):
        cs.fiber_metric_h(phi5, phi5, phi5)


def test_complex_structure_example():
    phi = skew(3, 1, 2)
    np.testing.assert_allclose(cs.fiber_complex_structure(skew(3, 1, 3), phi), skew(3, 2, 3))


@pytest.mark.parametrize("n", [3, 5, 7])
def test_complex_structure_properties(n, rng):
    phi = cs.random_structure(n, 9).phi
    for _ in range(20):
        Q = cs.random_tangent(phi, rng)
        JQ = cs.fiber_complex_structure(Q, phi)
        assert cs.is_tangent(JQ, phi)
        np.testing.assert_allclose(cs.fiber_complex_structure(JQ, phi), -Q, atol=1e-10)
        assert cs.fiber_metric_h(JQ, JQ, phi) == pytest.approx(cs.fiber_metric_h(Q, Q, phi), rel=1e-12)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_orthogonal_invariance(n, rng):
    s = cs.random_structure(n, 1)
    A = linalg.random_orthogonal(n, 2)
    t = s.transformed(A)
    P, Q = cs.random_tangent(s.phi, rng), cs.random_tangent(s.phi, rng)
    AP, AQ = A @ P @ A.T, A @ Q @ A.T
    assert cs.fiber_metric_h(AP, AQ, t.phi) == pytest.approx(cs.fiber_metric_h(P, Q, s.phi), abs=1e-12)
    np.testing.assert_allclose(cs.fiber_complex_structure(AQ, t.phi),
                               A @ cs.fiber_complex_structure(Q, s.phi) @ A.T, atol=1e-12)


def test_standard_basis_n3():
    basis = cs.standard_vertical_basis(n=3)
    np.testing.assert_allclose(basis[0], skew(3, 1, 3) / np.sqrt(2))
    np.testing.assert_allclose(basis[1], skew(3, 2, 3) / np.sqrt(2))


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_standard_basis_orthonormal_in_random_frame(n):
    k = (n - 1) // 2
    frame = linalg.random_orthogonal(n, 4)
    s = cs.structure_from_frame(frame)
    basis = cs.standard_vertical_basis(frame)
    assert len(basis) == k * k + k
    gram = np.array([[cs.fiber_metric_h(P, Q, s.phi) for Q in basis] for P in basis])
    np.testing.assert_allclose(gram, np.eye(len(basis)), atol=1e-10)
    for P, Q in zip(basis[::2], basis[1::2]):
        np.testing.assert_allclose(cs.fiber_complex_structure(P, s.phi), Q, atol=1e-10)


def test_standard_basis_rejects_bad_frame():
    with pytest.raises(linalg.DegenerateFrameError):
        cs.standard_vertical_basis(2 * np.eye(3))


@pytest.mark.parametrize("n", [3, 5, 7])
def test_adapted_frame(n):
    s = cs.random_structure(n, 8)
    F = cs.adapted_frame(s)
    c = cs.structure_from_frame(F)
    np.testing.assert_allclose(c.phi, s.phi, atol=1e-10)
    np.testing.assert_allclose(c.xi, s.xi, atol=1e-12)


def test_covering_and_orientation():
    s = cs.canonical_structure(3)
    assert cs.covering_project(s).F is cs.covering_project(s.flipped()).F
    assert cs.orientation_class(s) == 1
    assert cs.orientation_class(s.flipped()) == -1
    r = cs.random_structure(3, 0)
    assert cs.orientation_class(r) * cs.orientation_class(r.flipped()) == -1
    u = np.array([0.3, -0.4, 0.866])
    u /= np.linalg.norm(u)
    assert cs.orientation_class(cs.AlmostContactStructure(cs.cross_matrix(u), u)) == 1


@pytest.mark.parametrize("n", [3, 5])
def test_vertical_pair_is_graph(n, rng):
    s = cs.random_structure(n, 6)
    Q = cs.random_tangent(s.phi, rng)
    Q2, v = cs.vertical_pair(Q, s)
    assert Q2 is Q
    np.testing.assert_allclose(v, s.phi @ Q @ s.xi)
    assert abs(v @ s.xi) < 1e-12


def test_vertical_from_xi_motion(rng):
    s = cs.random_structure(3, 1)
    Q = cs.random_tangent(s.phi, rng)
    V = s.phi @ Q @ s.xi
    np.testing.assert_allclose(cs.vertical_from_xi_motion(V, s), Q, atol=1e-12)
