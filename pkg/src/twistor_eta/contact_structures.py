"""Fiber geometry of the twistor space: f-structures and almost contact structures.

Everything here lives on a single Euclidean space ``(R^n, dot)``.  The
manifold ``F_k`` of compatible f-structures of rank ``2k`` sits inside the
skew matrices; ``C`` (almost contact metric structures) double covers it
when ``n = 2k + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .linalg import ATOL, trace_metric, unit_skew

RANK_CUTOFF = 1e-8


class StructureError(ValueError):
    pass


class NotTangentError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FStructure:
    """Skew endomorphism ``F`` with ``F^3 + F = 0`` and rank ``2k``."""

    F: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.F.shape[0]

    def check(self, atol: float = ATOL) -> None:
        F = self.F
        if not linalg.is_skew(F, atol=atol):
            raise StructureError("F is not skew-symmetric")
        if not np.allclose(F @ F @ F + F, 0, atol=atol, rtol=0):
            raise StructureError("F^3 + F != 0")
        if structure_rank(F) != 2 * self.k:
            raise StructureError(f"rank of F is not {2 * self.k}")


@dataclass(frozen=True, eq=False)
class AlmostContactStructure:
    """Pair ``(phi, xi)`` with ``phi^2 = -I + xi xi^T`` and ``|xi| = 1``."""

    phi: np.ndarray
    xi: np.ndarray

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def k(self) -> int:
        return (self.n - 1) // 2

    def flipped(self) -> "AlmostContactStructure":
        """The sheet-exchanging map ``(phi, xi) -> (phi, -xi)``."""
        return AlmostContactStructure(self.phi, -self.xi)

    def transformed(self, A: np.ndarray) -> "AlmostContactStructure":
        return AlmostContactStructure(A @ self.phi @ A.T, A @ self.xi)

    def violations(self) -> dict[str, float]:
        phi, xi = self.phi, self.xi
        I = np.eye(self.n)
        P = I - np.outer(xi, xi)
        return {
            "unit_xi": abs(xi @ xi - 1.0),
            "phi_squared": float(np.abs(phi @ phi + P).max()),
            "compatible": float(np.abs(phi.T @ phi - P).max()),
            "phi_xi": float(np.abs(phi @ xi).max()),
            "skew": float(np.abs(phi + phi.T).max()),
        }

    def check(self, atol: float = ATOL) -> None:
        if self.n % 2 == 0:
            raise StructureError("almost contact structures need odd n")
        bad = {k: v for k, v in self.violations().items() if v > atol}
        if bad:
            raise StructureError(f"not an almost contact structure: {bad}")


def structure_rank(F: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    return int(np.sum(np.linalg.svd(F, compute_uv=False) > cutoff))


def _check_odd(n: int) -> int:
    if n < 3 or n % 2 == 0:
        raise StructureError(f"n must be odd and >= 3, got {n}")
    return (n - 1) // 2


def canonical_structure(n: int) -> AlmostContactStructure:
    """``phi = e_12 + e_34 + ... + e_{2k-1,2k}``, ``xi = e_{2k+1}``."""
    k = _check_odd(n)
    phi = sum(unit_skew(n, 2 * i, 2 * i + 1) for i in range(k))
    return AlmostContactStructure(phi, np.eye(n)[n - 1].copy())


def structure_from_frame(frame: np.ndarray) -> AlmostContactStructure:
    """Canonical structure written in the orthonormal frame given by the columns."""
    frame = np.asarray(frame, dtype=float)
    if not linalg.is_orthonormal(frame):
        raise linalg.DegenerateFrameError("frame is not orthonormal")
    return canonical_structure(frame.shape[0]).transformed(frame)


def random_structure(n: int, seed) -> AlmostContactStructure:
    _check_odd(n)
    return structure_from_frame(linalg.random_orthogonal(n, seed))


def adapted_frame(sigma: AlmostContactStructure) -> np.ndarray:
    """Orthonormal frame ``(u_1, phi u_1, ..., u_k, phi u_k, xi)`` for ``sigma``.

    In this frame ``sigma`` is the canonical structure.
    """
    n, k = sigma.n, sigma.k
    cols: list[np.ndarray] = []
    for _ in range(k):
        B = np.column_stack(cols + [sigma.xi]) if cols else sigma.xi[:, None]
        # residual of the standard basis against the span so far; take the largest
        P = np.eye(n) - B @ np.linalg.pinv(B)
        cand = P @ np.eye(n)
        u = cand[:, np.argmax(np.linalg.norm(cand, axis=0))]
        u = u / np.linalg.norm(u)
        cols += [u, sigma.phi @ u]
    frame = np.column_stack(cols + [sigma.xi])
    return linalg.gram_schmidt(frame)


def fk_dimension(n: int, k: int) -> int:
    """Dimension ``2nk - 3k^2 - k`` of the manifold of rank-``2k`` f-structures."""
    if not (0 < 2 * k <= n):
        raise StructureError(f"need 0 < 2k <= n, got n={n}, k={k}")
    return 2 * n * k - 3 * k * k - k


def fiber_scalar_curvature(n: int, k: int) -> float:
    """Scalar curvature ``(n - k - 1)(2nk - 3k^2 - k) / 2`` of the invariant metric."""
    return 0.5 * (n - k - 1) * fk_dimension(n, k)


def tangency_residual(Q: np.ndarray, F: np.ndarray) -> np.ndarray:
    F2 = F @ F
    return Q @ F2 + F @ Q @ F + F2 @ Q + Q


def tangency_matrix(F: np.ndarray) -> np.ndarray:
    """Matrix of ``Q -> Q F^2 + F Q F + F^2 Q + Q`` on 2-vector coordinates."""
    return linalg.operator_matrix(lambda Q: tangency_residual(Q, F), F.shape[0])


def _phi_key(F: np.ndarray) -> bytes:
    return np.ascontiguousarray(F).tobytes()


@lru_cache(maxsize=256)
def _tangent_basis_cached(key: bytes, n: int) -> np.ndarray:
    F = np.frombuffer(key).reshape(n, n)
    _, s, vt = np.linalg.svd(tangency_matrix(F))
    rank = int(np.sum(s > RANK_CUTOFF))
    return vt[rank:].copy()


def tangent_space_basis(F: np.ndarray) -> np.ndarray:
    """G-orthonormal basis of ``m_F`` as rows of 2-vector coordinates."""
    F = np.asarray(F, dtype=float)
    return _tangent_basis_cached(_phi_key(F), F.shape[0])


def tangent_dimension(F: np.ndarray) -> int:
    return tangent_space_basis(F).shape[0]


def is_tangent(Q: np.ndarray, F: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.abs(tangency_residual(Q, F)).max() <= atol)


def tangent_project(Q: np.ndarray, F: np.ndarray) -> np.ndarray:
    """G-orthogonal projection of a skew ``Q`` onto the tangent space at ``F``."""
    N = tangent_space_basis(F)
    w = linalg.endo_to_wedge(Q)
    return linalg.wedge_to_endo(N.T @ (N @ w))


def random_tangent(F: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    N = tangent_space_basis(F)
    return linalg.wedge_to_endo(rng.standard_normal(N.shape[0]) @ N)


def _require_tangent(F: np.ndarray, *Qs: np.ndarray, atol: float = 1e-8) -> None:
    for Q in Qs:
        if not is_tangent(Q, F, atol=atol):
            raise NotTangentError("vertical vector is not tangent at phi")


def fiber_metric_h(P: np.ndarray, Q: np.ndarray, F: np.ndarray,
                   check: bool = True) -> float:
    """``h(P, Q) = 2 G(P, Q) - G(F P F, Q)``."""
    if check:
        _require_tangent(F, P, Q)
    return 2.0 * trace_metric(P, Q) - trace_metric(F @ P @ F, Q)


def fiber_complex_structure(Q: np.ndarray, F: np.ndarray, check: bool = True) -> np.ndarray:
    """``J Q = F Q - Q F + F Q F^2``."""
    if check:
        _require_tangent(F, Q)
    return F @ Q - Q @ F + F @ Q @ F @ F


def standard_vertical_basis(frame: np.ndarray | None = None, n: int | None = None) -> list[np.ndarray]:
    """h-orthonormal basis ``{A'_pq, A''_pq, B'_r, B''_r}`` of the tangent space.

    The basis is built for the canonical structure and then carried by the
    orthonormal ``frame`` (columns).  ``A`` indices run over ``p < q <= k`` and
    ``r <= k``, giving ``k^2 + k`` elements; ``J A' = A''`` and ``J B' = B''``.
    """
    if frame is None:
        if n is None:
            raise ValueError("give a frame or a dimension")
        frame = np.eye(n)
    frame = np.asarray(frame, dtype=float)
    if not linalg.is_orthonormal(frame):
        raise linalg.DegenerateFrameError("frame is not orthonormal")
    n = frame.shape[0]
    k = _check_odd(n)
    s = 1.0 / np.sqrt(2.0)
    e = lambda i, j: unit_skew(n, i - 1, j - 1)  # 1-based, as in the block notation
    basis = []
    for p in range(1, k):
        for q in range(p + 1, k + 1):
            basis.append(s * (e(2 * p - 1, 2 * q - 1) - e(2 * p, 2 * q)))
            basis.append(s * (e(2 * p - 1, 2 * q) + e(2 * p, 2 * q - 1)))
    for r in range(1, k + 1):
        basis.append(s * e(2 * r - 1, n))
        basis.append(s * e(2 * r, n))
    return [frame @ B @ frame.T for B in basis]


def vertical_basis(sigma: AlmostContactStructure) -> list[np.ndarray]:
    """``standard_vertical_basis`` in a frame adapted to an arbitrary ``sigma``."""
    return standard_vertical_basis(adapted_frame(sigma))


def covering_project(sigma: AlmostContactStructure) -> FStructure:
    return FStructure(sigma.phi, sigma.k)


def orientation_class(sigma: AlmostContactStructure) -> int:
    """Sheet label (+1 or -1) of a point over an oriented 3-space."""
    if sigma.n != 3:
        raise StructureError("orientation class is defined here for n = 3 only")
    xi = sigma.xi
    u = np.eye(3)[np.argmin(np.abs(xi))]
    u = u - (u @ xi) * xi
    u /= np.linalg.norm(u)
    return int(np.sign(np.linalg.det(np.column_stack([u, sigma.phi @ u, xi]))))


def vertical_pair(Q: np.ndarray, sigma: AlmostContactStructure) -> tuple[np.ndarray, np.ndarray]:
    """The vertical datum ``(Q, phi Q xi)`` of the twistor space."""
    return Q, sigma.phi @ Q @ sigma.xi


def vertical_from_xi_motion(V: np.ndarray, sigma: AlmostContactStructure) -> np.ndarray:
    """Tangent ``Q`` with ``phi Q xi = V``; ``V`` must be orthogonal to ``xi``."""
    N = tangent_space_basis(sigma.phi)
    basis = linalg.wedge_to_endo(N)
    M = np.stack([sigma.phi @ B @ sigma.xi for B in basis], axis=1)
    c, *_ = np.linalg.lstsq(M, V, rcond=None)
    return np.einsum("a,aij->ij", c, basis)


def cross_matrix(u: np.ndarray) -> np.ndarray:
    """``[u]_x`` with ``[u]_x v = u x v``; the positive-sheet ``phi`` for ``xi = u``."""
    x, y, z = u
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def fiber_chart(n: int, half_width: float = 0.5):
    """Chart ``y -> exp(Z) phi0 exp(-Z)``, ``Z = sum y_a U_a``, of the fiber with metric ``h``.

    ``U_a`` is the standard vertical basis at the canonical ``phi0``.  The
    velocity of ``phi`` is exact (Frechet derivative of the exponential), so
    only the curvature stencils difference the metric.
    """
    from scipy.linalg import expm, expm_frechet

    from .geometry_engine import ChartMetric

    phi0 = canonical_structure(n).phi
    U = standard_vertical_basis(n=n)
    d = len(U)

    def metric(y):
        Z = np.einsum("a,aij->ij", np.asarray(y, dtype=float), np.asarray(U))
        vel = []
        A = None
        for Ua in U:
            A, dA = expm_frechet(Z, Ua)
            vel.append(dA @ phi0 @ A.T + A @ phi0 @ dA.T)
        if A is None:
            A = expm(Z)
        phi = A @ phi0 @ A.T
        g = np.empty((d, d))
        for a in range(d):
            for b in range(a, d):
                g[a, b] = g[b, a] = fiber_metric_h(vel[a], vel[b], phi, check=False)
        return g

    return ChartMetric(d, metric, -half_width * np.ones(d), half_width * np.ones(d),
                       label=f"fiber(n={n})", vectorized=False,
                       params={"kind": "fiber", "n": n})
