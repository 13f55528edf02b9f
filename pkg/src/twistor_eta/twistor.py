"""The twistor space of an odd-dimensional Riemannian manifold.

A point is an almost contact structure ``sigma = (phi, xi)`` on the tangent
space at a base point, written in an orthonormal frame there.  A tangent
vector splits as ``E = (X, Q)`` with ``X`` horizontal (frame components of
``pi_* E``) and ``Q`` a skew matrix tangent to the fiber at ``phi``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import contact_structures as cs
from . import geometry_engine as ge
from . import linalg
from .contact_structures import AlmostContactStructure


class MissingCovariantDerivative(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwistorTangent:
    X: np.ndarray
    Q: np.ndarray

    def __add__(self, other: "TwistorTangent") -> "TwistorTangent":
        return TwistorTangent(self.X + other.X, self.Q + other.Q)

    def __sub__(self, other: "TwistorTangent") -> "TwistorTangent":
        return TwistorTangent(self.X - other.X, self.Q - other.Q)

    def __mul__(self, c: float) -> "TwistorTangent":
        return TwistorTangent(c * self.X, c * self.Q)

    __rmul__ = __mul__

    def __neg__(self) -> "TwistorTangent":
        return TwistorTangent(-self.X, -self.Q)

    @classmethod
    def horizontal(cls, X: np.ndarray) -> "TwistorTangent":
        X = np.asarray(X, dtype=float)
        return cls(X, np.zeros((X.size, X.size)))

    @classmethod
    def vertical(cls, Q: np.ndarray) -> "TwistorTangent":
        Q = np.asarray(Q, dtype=float)
        return cls(np.zeros(Q.shape[0]), Q)

    def vertical_pair(self, sigma: AlmostContactStructure) -> tuple[np.ndarray, np.ndarray]:
        return cs.vertical_pair(self.Q, sigma)


@dataclass(frozen=True, eq=False)
class TwistorPoint:
    """Base point ``p`` (chart coordinates), an orthonormal frame at ``p`` and ``sigma`` in that frame."""

    p: np.ndarray
    frame: np.ndarray
    sigma: AlmostContactStructure

    def check(self, chart: ge.ChartMetric, atol: float = linalg.ATOL) -> None:
        if not linalg.is_orthonormal(self.frame, chart.g(self.p), atol=atol):
            raise linalg.DegenerateFrameError("frame is not orthonormal for g(p)")
        self.sigma.check(atol)


@dataclass(frozen=True)
class TwistorMetricParams:
    t: float
    nu: float | None = None
    n: int = 3

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")

    @property
    def k(self) -> int:
        return (self.n - 1) // 2


def random_tangent(sigma: AlmostContactStructure, rng: np.random.Generator) -> TwistorTangent:
    return TwistorTangent(rng.standard_normal(sigma.n), cs.random_tangent(sigma.phi, rng))


def h_t(E: TwistorTangent, E2: TwistorTangent, sigma: AlmostContactStructure, t: float,
        check: bool = True) -> float:
    """``h_t = pi^* g + t h`` with horizontal and vertical parts orthogonal."""
    return float(E.X @ E2.X) + t * cs.fiber_metric_h(E.Q, E2.Q, sigma.phi, check=check)


def eta_t(E: TwistorTangent, sigma: AlmostContactStructure) -> float:
    return float(E.X @ sigma.xi)


def chi(sigma: AlmostContactStructure) -> TwistorTangent:
    """Characteristic field: the horizontal lift of ``xi``."""
    return TwistorTangent.horizontal(sigma.xi)


def phi_structures(E: TwistorTangent, sigma: AlmostContactStructure, alpha: int = 1,
                   check: bool = True) -> TwistorTangent:
    """``Phi_alpha``: ``phi`` on the horizontal part, ``+J`` (alpha=1) or ``-J`` (alpha=2) vertically."""
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    JQ = cs.fiber_complex_structure(E.Q, sigma.phi, check=check)
    return TwistorTangent(sigma.phi @ E.X, JQ if alpha == 1 else -JQ)


def _horizontal_curvature_norm(X: np.ndarray, operator: np.ndarray, basis) -> float:
    total = 0.0
    for U in basis:
        RU = linalg.wedge_to_endo(operator @ linalg.endo_to_wedge(U))
        v = RU @ X
        total += v @ v
    return total


def ricci_general(E: TwistorTangent, sigma: AlmostContactStructure, curvature: ge.CurvatureData,
                  t: float, basis=None) -> float:
    """Ricci quadratic form of ``h_t`` from the curvature of the base at ``p``.

    ``curvature`` must be expressed in the same orthonormal frame as ``sigma``.
    The covariant-derivative term reads ``(nabla_Z Rop)(J Q)`` as an
    endomorphism applied to ``X`` and traces over an orthonormal ``Z``.
    """
    k = sigma.k
    X, Q = E.X, E.Q
    Rop = curvature.operator
    JQ = cs.fiber_complex_structure(Q, sigma.phi, check=False)
    jq = linalg.endo_to_wedge(JQ)
    if basis is None:
        basis = cs.vertical_basis(sigma)

    value = float(X @ curvature.ricci @ X)
    if curvature.nabla is not None:
        # Trace(Z -> (nabla_Z R)(JQ, X))
        trace = 0.0
        for z in range(sigma.n):
            trace += (linalg.wedge_to_endo(curvature.nabla[z] @ jq) @ X)[z]
        value -= 2 * t * trace
    elif not curvature.locally_symmetric and np.any(JQ) and np.any(X):
        raise MissingCovariantDerivative(
            "curvature data carries no covariant derivative and is not flagged locally symmetric")
    RJQ = Rop @ jq
    value += 2 * t * t * float(RJQ @ RJQ)
    value -= 2 * t * _horizontal_curvature_norm(X, Rop, basis)
    value += 0.5 * k * cs.fiber_metric_h(Q, Q, sigma.phi, check=False)
    return value


def ricci_const_curv(E: TwistorTangent, sigma: AlmostContactStructure, nu: float, t: float) -> float:
    """Ricci quadratic form of ``h_t`` over a base of constant curvature ``nu``."""
    k = sigma.k
    phi = sigma.phi
    X, Q = E.X, E.Q
    phiX = phi @ X
    hQQ = cs.fiber_metric_h(Q, Q, phi, check=False)
    value = 2 * k * nu * (1 - t * nu) * float(X @ X) + t * nu * nu * float(phiX @ phiX)
    value += 0.5 * (k + 2 * t * t * nu * nu) * hQQ
    value += t * t * nu * nu * cs.fiber_metric_h(phi @ Q @ phi, Q, phi, check=False)
    return value


def space_form_curvature(nu: float, n: int) -> ge.CurvatureData:
    """Closed-form curvature of a space form in any orthonormal frame."""
    N = linalg.bivector_dim(n)
    return ge.CurvatureData(point=np.zeros(n), frame=np.eye(n), operator=nu * np.eye(N),
                            ricci=(n - 1) * nu * np.eye(n), scalar=n * (n - 1) * nu,
                            nabla=np.zeros((n, N, N)), locally_symmetric=True)


def horizontal_equation_lhs(X: np.ndarray, sigma: AlmostContactStructure, operator: np.ndarray,
             ricci: np.ndarray, t: float, basis=None) -> float:
    """``c_M(X, X) - 2t sum_alpha |R(U_alpha) X|^2`` over an h-orthonormal basis."""
    if basis is None:
        basis = cs.vertical_basis(sigma)
    X = np.asarray(X, dtype=float)
    return float(X @ ricci @ X) - 2 * t * _horizontal_curvature_norm(X, operator, basis)


def vertical_equation_lhs(Q: np.ndarray, sigma: AlmostContactStructure, operator: np.ndarray, t: float) -> float:
    """``2 t^2 |Rop(Q)|^2 + (k/2) |Q|_h^2``."""
    RQ = operator @ linalg.endo_to_wedge(Q)
    return 2 * t * t * float(RQ @ RQ) + 0.5 * sigma.k * cs.fiber_metric_h(Q, Q, sigma.phi, check=False)


def twistor_scalar_curvature(sigma: AlmostContactStructure, t: float, ricci_form) -> float:
    """Trace of a Ricci quadratic form ``ricci_form(E)`` with respect to ``h_t``."""
    total = 0.0
    for X in np.eye(sigma.n):
        total += ricci_form(TwistorTangent.horizontal(X))
    for U in cs.vertical_basis(sigma):
        total += ricci_form(TwistorTangent.vertical(U / np.sqrt(t)))
    return total


# --------------------------------------------------------------------------
# Sasaki oracle (n = 3)


def _stereo(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit vector ``s(y)`` (south-pole stereographic inverse) and ``ds/dy`` of shape (..., 3, 2)."""
    y1, y2 = y[..., 0], y[..., 1]
    d = 1.0 + y1 * y1 + y2 * y2
    s = np.stack([2 * y1 / d, 2 * y2 / d, 2 / d - 1.0], axis=-1)
    d2 = d * d
    ds = np.empty(y.shape[:-1] + (3, 2))
    ds[..., 0, 0] = 2 / d - 4 * y1 * y1 / d2
    ds[..., 0, 1] = -4 * y1 * y2 / d2
    ds[..., 1, 0] = -4 * y1 * y2 / d2
    ds[..., 1, 1] = 2 / d - 4 * y2 * y2 / d2
    ds[..., 2, 0] = -4 * y1 / d2
    ds[..., 2, 1] = -4 * y2 / d2
    return s, ds


def rotation_to(v: np.ndarray) -> np.ndarray:
    """A rotation taking ``e_3`` to the unit vector ``v``."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    a = np.eye(3)[np.argmin(np.abs(v))]
    a = a - (a @ v) * v
    a /= np.linalg.norm(a)
    return np.column_stack([a, np.cross(v, a), v])


@dataclass(frozen=True, eq=False)
class SasakiOracle:
    """Unit tangent bundle chart ``(x^1, x^2, x^3, y^1, y^2)`` over a space-form chart.

    ``xi(x, y) = sum_a u^a(y) f_a(x)`` with ``f`` the Gram-Schmidt frame of the
    coordinate basis and ``u = R0 s(y)``.  The metric is
    ``g(x', x') + 2t g(nabla xi, nabla xi)``.
    """

    chart: ge.ChartMetric
    base: ge.ChartMetric
    nu: float
    t: float
    rotation: np.ndarray

    def _pieces(self, z: np.ndarray):
        z = np.asarray(z, dtype=float)
        x, y = z[..., :3], z[..., 3:]
        nu = self.nu
        omega = 1.0 + 0.25 * nu * np.sum(x * x, axis=-1)
        s, ds = _stereo(y)
        u = s @ self.rotation.T
        du = np.einsum("ab,...bc->...ac", self.rotation, ds)
        xi = omega[..., None] * u
        dxi_dx = 0.5 * nu * u[..., :, None] * x[..., None, :]
        dxi_dy = omega[..., None, None] * du
        Gam = ge.christoffel_batch(self.base, x)
        K = np.empty(z.shape[:-1] + (3, 5))
        K[..., :3] = dxi_dx + np.einsum("...ijk,...k->...ij", Gam, xi)
        K[..., 3:] = dxi_dy
        return x, omega, u, K

    def metric(self, z: np.ndarray) -> np.ndarray:
        x, _, _, K = self._pieces(z)
        g = self.base.g(x)
        G = 2 * self.t * np.einsum("...ia,...ij,...jb->...ab", K, g, K)
        G[..., :3, :3] += g
        return G

    def correspond(self, z: np.ndarray, zdot: np.ndarray) -> tuple[AlmostContactStructure, TwistorTangent]:
        """Twistor point (positive sheet) and tangent for a chart point and chart velocity."""
        z = np.asarray(z, dtype=float)
        x, _, u, K = self._pieces(z)
        F = ge.orthonormal_frame(self.base.g(x))
        Finv = np.linalg.inv(F)
        X = Finv @ zdot[:3]
        V = Finv @ (K @ zdot)
        sigma = AlmostContactStructure(cs.cross_matrix(u), u)
        Q = cs.vertical_from_xi_motion(V, sigma)
        return sigma, TwistorTangent(X, Q)


def sasaki_oracle(nu: float, t: float, centre: np.ndarray | None = None,
                  y_half_width: float = 1.0) -> SasakiOracle:
    if not (nu > 0 and t > 0):
        raise ValueError("nu and t must be positive")
    base = ge.space_form_chart(nu, 3)
    R0 = np.eye(3) if centre is None else rotation_to(centre)
    holder: dict = {}

    def metric(z):
        return holder["oracle"].metric(z)

    lower = np.concatenate([base.lower, -y_half_width * np.ones(2)])
    upper = np.concatenate([base.upper, y_half_width * np.ones(2)])
    chart = ge.ChartMetric(5, metric, lower, upper, label=f"sasaki(nu={nu}, t={t})",
                           params={"kind": "sasaki", "nu": nu, "t": t})
    oracle = SasakiOracle(chart, base, nu, t, R0)
    holder["oracle"] = oracle
    return oracle


def sasaki_oracle_chart(nu: float, t: float, centre: np.ndarray | None = None) -> ge.ChartMetric:
    return sasaki_oracle(nu, t, centre).chart


def oracle_compare(nu: float, t: float, n_points: int = 5, tangents_per_point: int = 4,
                   seed=0, step: float = ge.FIRST_STEP, second_step: float = ge.SECOND_STEP,
                   richardson: bool = False, map_fn=map) -> list[dict]:
    """Oracle versus analytic Ricci at random correspondences.

    Each record holds the chart point, the chart velocity (normalized to
    ``h_t = 1``), ``h_t``, ``eta``, both Ricci values and their relative gap.
    """
    rng = np.random.default_rng(seed)
    jobs = []
    for _ in range(n_points):
        centre = rng.standard_normal(3)
        oracle = sasaki_oracle(nu, t, centre=centre)
        z = np.concatenate([rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.5, 0.5, 2)])
        zdots = rng.standard_normal((tangents_per_point, 5))
        jobs.append((oracle, z, zdots))

    def run(job):
        oracle, z, zdots = job
        data = ge.curvature(oracle.chart, z, step=step, second_step=second_step, richardson=richardson)
        ric = data.ricci_coordinates()
        G = oracle.chart.g(z)
        out = []
        for zd in zdots:
            zd = zd / np.sqrt(zd @ G @ zd)
            sigma, E = oracle.correspond(z, zd)
            c_oracle = float(zd @ ric @ zd)
            c_an = ricci_const_curv(E, sigma, nu, t)
            ht = h_t(E, E, sigma, t, check=False)
            out.append({
                "point": z.tolist(),
                "tangent": zd.tolist(),
                "h_t": ht,
                "h_t_chart": float(zd @ G @ zd),
                "eta": eta_t(E, sigma),
                "c_t_analytic": c_an,
                "c_t_oracle": c_oracle,
                "relative_deviation": abs(c_oracle - c_an) / max(abs(c_an), ht),
            })
        return out

    records = []
    for chunk in map_fn(run, jobs):
        records.extend(chunk)
    return records
