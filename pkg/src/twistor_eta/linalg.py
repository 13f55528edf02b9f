"""Small dense linear algebra on skew endomorphisms and 2-vectors.

Two-vectors are stored as flat arrays of components on the lexicographic
basis ``{e_i ^ e_j : i < j}``.  Skew endomorphisms are plain ``(n, n)``
arrays acting on column vectors.  The identification between the two is
``g(a X, Y) = g(a^, X ^ Y)`` so that ``e_1 ^ e_3`` acts by
``e_1 -> e_3, e_3 -> -e_1``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

ATOL = 1e-10


class DimensionError(ValueError):
    pass


class DegenerateFrameError(ValueError):
    pass


@lru_cache(maxsize=None)
def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    """Lexicographic list of index pairs ``(i, j)``, ``i < j`` (0-based)."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def _pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = pair_list(n)
    return (np.array([p[0] for p in pairs], dtype=int),
            np.array([p[1] for p in pairs], dtype=int))


def bivector_dim(n: int) -> int:
    return n * (n - 1) // 2


def dim_from_bivector(m: int) -> int:
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    if bivector_dim(n) != m:
        raise DimensionError(f"{m} is not a bivector dimension")
    return n


def pair_index(n: int, i: int, j: int) -> tuple[int, float]:
    """Position of ``e_i ^ e_j`` in the basis and the sign of the reordering."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise DimensionError(f"bad index pair ({i}, {j}) for n={n}")
    sign = 1.0
    if i > j:
        i, j, sign = j, i, -1.0
    return pair_list(n).index((i, j)), sign


def unit_bivector(n: int, i: int, j: int) -> np.ndarray:
    """Components of ``e_i ^ e_j`` (0-based indices, any order)."""
    w = np.zeros(bivector_dim(n))
    idx, sign = pair_index(n, i, j)
    w[idx] = sign
    return w


def unit_skew(n: int, i: int, j: int) -> np.ndarray:
    """The skew endomorphism of ``e_i ^ e_j``: ``e_i -> e_j``, ``e_j -> -e_i``."""
    return wedge_to_endo(unit_bivector(n, i, j))


def wedge(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    I, J = _pair_arrays(u.shape[-1])
    return u[..., I] * v[..., J] - u[..., J] * v[..., I]


def wedge_to_endo(w: np.ndarray) -> np.ndarray:
    """Skew matrix ``A`` with ``g(A X, Y) = g(w, X ^ Y)``; batched over leading axes."""
    w = np.asarray(w, dtype=float)
    n = dim_from_bivector(w.shape[-1])
    I, J = _pair_arrays(n)
    A = np.zeros(w.shape[:-1] + (n, n))
    # A[:, i] is the image of e_i
    A[..., J, I] = w
    A[..., I, J] = -w
    return A


def endo_to_wedge(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    if a.shape[-2] != n:
        raise DimensionError("endomorphism must be square")
    I, J = _pair_arrays(n)
    return 0.5 * (a[..., J, I] - a[..., I, J])


def bivector_inner(w1: np.ndarray, w2: np.ndarray) -> float:
    """Inner product on 2-vectors; the lexicographic basis is orthonormal."""
    return float(np.dot(w1, w2))


def trace_metric(S: np.ndarray, T: np.ndarray) -> float:
    """``G(S, T) = -1/2 Trace(S T)``, the standard metric on skew matrices."""
    S = np.asarray(S, dtype=float)
    T = np.asarray(T, dtype=float)
    if S.shape != T.shape or S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError(f"shape mismatch {S.shape} vs {T.shape}")
    # trace(S @ T) without forming the product
    return float(-0.5 * np.einsum("ij,ji->", S, T))


def interior_product(X: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``iota_X w``: the endomorphism of ``w`` applied to ``X``."""
    return wedge_to_endo(w) @ np.asarray(X, dtype=float)


def polarize(q: Callable, E, F) -> float:
    """Symmetric bilinear form of a quadratic form: ``(q(E+F) - q(E-F)) / 4``."""
    return 0.25 * (q(E + F) - q(E - F))


def is_skew(A: np.ndarray, atol: float = 1e-12) -> bool:
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.allclose(A, -A.T, atol=atol, rtol=0)


def random_orthogonal(n: int, seed) -> np.ndarray:
    """Haar-distributed orthogonal matrix, deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, n))
    return Z - Z.T


def gram_schmidt(frame: np.ndarray, metric: np.ndarray | None = None,
                 tol: float = 1e-10) -> np.ndarray:
    """Orthonormalize the columns of ``frame`` in order.

    ``metric`` defaults to the identity.  Raises ``DegenerateFrameError`` when
    the Gram determinant of the input falls below ``tol``.
    """
    frame = np.asarray(frame, dtype=float)
    g = np.eye(frame.shape[0]) if metric is None else np.asarray(metric, dtype=float)
    gram = frame.T @ g @ frame
    if np.linalg.det(gram) <= tol:
        raise DegenerateFrameError("frame is linearly dependent")
    out = np.empty_like(frame)
    for i in range(frame.shape[1]):
        v = frame[:, i].copy()
        # two passes keep orthogonality at the 1e-16 level
        for _ in range(2):
            for j in range(i):
                v -= (out[:, j] @ g @ v) * out[:, j]
        out[:, i] = v / np.sqrt(v @ g @ v)
    return out


def is_orthonormal(frame: np.ndarray, metric: np.ndarray | None = None,
                   atol: float = ATOL) -> bool:
    frame = np.asarray(frame, dtype=float)
    g = np.eye(frame.shape[0]) if metric is None else metric
    return np.allclose(frame.T @ g @ frame, np.eye(frame.shape[1]), atol=atol, rtol=0)


def skew_basis(n: int) -> np.ndarray:
    """Stack of ``unit_skew(n, i, j)`` in lexicographic order, a G-orthonormal basis."""
    return wedge_to_endo(np.eye(bivector_dim(n)))


def operator_matrix(op: Callable[[np.ndarray], np.ndarray], n: int,
                    basis: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Matrix of a linear map on skew endomorphisms in 2-vector coordinates."""
    if basis is None:
        basis = skew_basis(n)
    return np.stack([endo_to_wedge(op(B)) for B in basis], axis=1)
