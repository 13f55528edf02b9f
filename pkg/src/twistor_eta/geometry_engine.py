"""Chart-based Riemannian geometry by finite differences.

Sign convention: ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]`` and the
curvature operator on 2-vectors is

    g(Rop(X1 ^ X2), X3 ^ X4) = -g(R(X1, X2) X3, X4),

so a space form of sectional curvature ``nu`` has ``Rop = nu * Id``.  All
pointwise output (curvature operator, Ricci, covariant derivative) is given
in the Gram-Schmidt orthonormal frame of the coordinate basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg

FIRST_STEP = 1e-4
SECOND_STEP = 5e-4
NABLA_STEP = 1e-3


class ChartDomainError(ValueError):
    """Raised when a stencil would leave the chart domain."""


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChartMetric:
    """Metric on an open coordinate box.

    ``metric`` maps coordinates of shape ``(..., dim)`` to ``(..., dim, dim)``.
    ``metric_derivative``, when given, returns ``dg[..., k, i, j] = d_k g_ij``
    and is used in place of differencing the metric once.
    """

    dim: int
    metric: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    label: str = "chart"
    metric_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    vectorized: bool = True
    params: dict = field(default_factory=dict)

    def g(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.vectorized or x.ndim == 1:
            return self.metric(x)
        flat = x.reshape(-1, self.dim)
        out = np.stack([self.metric(p) for p in flat])
        return out.reshape(x.shape[:-1] + (self.dim, self.dim))

    def dg(self, x: np.ndarray) -> np.ndarray | None:
        if self.metric_derivative is None:
            return None
        x = np.asarray(x, dtype=float)
        if self.vectorized or x.ndim == 1:
            return self.metric_derivative(x)
        flat = x.reshape(-1, self.dim)
        out = np.stack([self.metric_derivative(p) for p in flat])
        return out.reshape(x.shape[:-1] + (self.dim,) * 3)

    def check_point(self, x: np.ndarray, margin: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ChartDomainError(f"point must have shape ({self.dim},)")
        if np.any(x - margin <= self.lower) or np.any(x + margin >= self.upper):
            raise ChartDomainError(
                f"point {x} closer than {margin} to the boundary of {self.label}")
        return x


@dataclass(frozen=True, eq=False)
class CurvatureData:
    """Curvature at one chart point, in the orthonormal ``frame`` (columns)."""

    point: np.ndarray
    frame: np.ndarray
    operator: np.ndarray
    ricci: np.ndarray
    scalar: float
    nabla: np.ndarray | None = None
    locally_symmetric: bool = False

    @property
    def rho(self) -> np.ndarray:
        # in an orthonormal frame the Ricci operator and form share components
        return self.ricci

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    def ricci_coordinates(self) -> np.ndarray:
        Finv = np.linalg.inv(self.frame)
        return Finv.T @ self.ricci @ Finv


# --------------------------------------------------------------------------
# stencils


def _offsets(dim: int, h: float) -> np.ndarray:
    return h * np.eye(dim)


def metric_first_derivative(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP) -> np.ndarray:
    """``dg[k, i, j] = d_k g_ij`` (analytic when the chart supplies it)."""
    dg = chart.dg(x)
    if dg is not None:
        return dg
    E = _offsets(chart.dim, step)
    gp = chart.g(x + E)
    gm = chart.g(x - E)
    return (gp - gm) / (2 * step)


def _second_derivative_once(chart: ChartMetric, x: np.ndarray, h: float) -> np.ndarray:
    n = chart.dim
    E = _offsets(n, h)
    if chart.metric_derivative is not None:
        # difference the exact first derivative: d_a d_b g = d_a (dg)[b]
        dp = chart.dg(x + E)
        dm = chart.dg(x - E)
        dd = (dp - dm) / (2 * h)
        return 0.5 * (dd + dd.transpose(1, 0, 2, 3))
    a, b = np.triu_indices(n)
    pts = np.concatenate([
        x + E[a] + E[b], x + E[a] - E[b], x - E[a] + E[b], x - E[a] - E[b],
        x[None, :],
    ])
    G = chart.g(pts)
    m = len(a)
    gpp, gpm, gmp, gmm, g0 = G[:m], G[m:2 * m], G[2 * m:3 * m], G[3 * m:4 * m], G[-1]
    out = np.empty((n, n, n, n))
    mixed = (gpp - gpm - gmp + gmm) / (4 * h * h)
    for idx, (i, j) in enumerate(zip(a, b)):
        if i == j:
            # gpp = g(x + 2h e_i); use the 2h three-point rule
            val = (gpp[idx] - 2 * g0 + gmm[idx]) / (4 * h * h)
        else:
            val = mixed[idx]
        out[i, j] = out[j, i] = val
    return out


def metric_second_derivative(chart: ChartMetric, x: np.ndarray, step: float = SECOND_STEP,
                             richardson: bool = False) -> np.ndarray:
    """``ddg[a, b, i, j] = d_a d_b g_ij`` by central differences."""
    D = _second_derivative_once(chart, x, step)
    if richardson:
        D2 = _second_derivative_once(chart, x, step / 2)
        D = (4 * D2 - D) / 3
    return D


def _check_metric(g: np.ndarray) -> np.ndarray:
    if not np.allclose(g, g.T, atol=1e-12, rtol=0):
        raise MetricError("metric is not symmetric")
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise MetricError("metric is not positive definite") from exc


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt frame of the coordinate basis: upper triangular ``F`` with ``F^T g F = I``."""
    L = _check_metric(g)
    return np.linalg.inv(L).T


def _christoffel_from(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    # batched over leading axes; dg[..., k, i, j] = d_k g_ij
    ginv = np.linalg.inv(g)
    # lowered: Gamma_{l, jk} = 1/2 (d_j g_lk + d_k g_lj - d_l g_jk)
    low = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    return np.einsum("...il,...ljk->...ijk", ginv, low)


def christoffel_batch(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP) -> np.ndarray:
    """``christoffel`` at a stack of points ``x[..., dim]`` (no domain check)."""
    x = np.asarray(x, dtype=float)
    dg = chart.dg(x)
    if dg is None:
        E = _offsets(chart.dim, step)
        dg = (chart.g(x[..., None, :] + E) - chart.g(x[..., None, :] - E)) / (2 * step)
    return _christoffel_from(chart.g(x), dg)


def christoffel(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[i, j, k]`` with ``nabla_j d_k = Gamma[i, j, k] d_i``."""
    x = chart.check_point(x, 2 * step)
    g = chart.g(x)
    _check_metric(g)
    return _christoffel_from(g, metric_first_derivative(chart, x, step))


def riemann_coordinates(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP,
                        second_step: float = SECOND_STEP, richardson: bool = False,
                        check: bool = True) -> np.ndarray:
    """``Rm[i, j, k, l] = g(R(d_i, d_j) d_k, d_l)`` in coordinates."""
    x = np.asarray(x, dtype=float)
    if check:
        chart.check_point(x, max(2 * second_step, 2 * step))
    g = chart.g(x)
    _check_metric(g)
    ginv = np.linalg.inv(g)
    dg = metric_first_derivative(chart, x, step)
    ddg = metric_second_derivative(chart, x, second_step, richardson)
    Gam = np.einsum("il,ljk->ijk", ginv,
                    0.5 * (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg))
    # d_m Gamma^i_jk
    dginv = -np.einsum("ip,mpq,ql->mil", ginv, dg, ginv)
    low = 0.5 * (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)
    dlow = 0.5 * (ddg.transpose(0, 2, 1, 3) + ddg.transpose(0, 2, 3, 1) - ddg)
    dGam = np.einsum("mil,ljk->mijk", dginv, low) + np.einsum("il,mljk->mijk", ginv, dlow)
    # R(d_i, d_j) d_k = R^l_{kij} d_l
    Rup = (np.einsum("iljk->lkij", dGam) - np.einsum("jlik->lkij", dGam)
           + np.einsum("lim,mjk->lkij", Gam, Gam) - np.einsum("ljm,mik->lkij", Gam, Gam))
    return np.einsum("wl,lkij->ijkw", g, Rup)


def _to_operator(Rm_frame: np.ndarray) -> np.ndarray:
    n = Rm_frame.shape[-1]
    I, J = linalg._pair_arrays(n)
    return -Rm_frame[..., I[:, None], J[:, None], I[None, :], J[None, :]]


def _frame_tensor(T: np.ndarray, F: np.ndarray) -> np.ndarray:
    return np.einsum("ijkl,ia,jb,kc,ld->abcd", T, F, F, F, F)


def curvature_operator(chart: ChartMetric, x: np.ndarray, **kw) -> np.ndarray:
    """Curvature operator on 2-vectors, lexicographic basis of the orthonormal frame."""
    return curvature(chart, x, **kw).operator


def curvature(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP,
              second_step: float = SECOND_STEP, richardson: bool = False,
              with_nabla: bool = False, nabla_step: float = NABLA_STEP) -> CurvatureData:
    x = np.asarray(x, dtype=float)
    margin = max(2 * second_step, 2 * step) + (nabla_step if with_nabla else 0.0)
    chart.check_point(x, margin)
    Rm = riemann_coordinates(chart, x, step, second_step, richardson, check=False)
    F = orthonormal_frame(chart.g(x))
    Rf = _frame_tensor(Rm, F)
    ric = np.einsum("ixyi->xy", Rf)
    ric = 0.5 * (ric + ric.T)
    nab = None
    if with_nabla:
        nab = _nabla_operator(chart, x, Rm, F, step, second_step, richardson, nabla_step)
    return CurvatureData(point=x, frame=F, operator=_to_operator(Rf), ricci=ric,
                         scalar=float(np.trace(ric)), nabla=nab)


def ricci(chart: ChartMetric, x: np.ndarray, **kw) -> tuple[np.ndarray, np.ndarray, float]:
    """``(c_M, rho, s)`` in the orthonormal frame; the round sphere gives ``c_M = (n-1) nu g``."""
    data = curvature(chart, x, **kw)
    return data.ricci, data.rho, data.scalar


def _nabla_operator(chart, x, Rm, F, step, second_step, richardson, h):
    n = chart.dim
    E = _offsets(n, h)
    dRm = np.stack([
        (riemann_coordinates(chart, x + E[m], step, second_step, richardson, check=False)
         - riemann_coordinates(chart, x - E[m], step, second_step, richardson, check=False))
        / (2 * h)
        for m in range(n)
    ])
    Gam = christoffel(chart, x, step)
    nab = (dRm
           - np.einsum("pmi,pjkl->mijkl", Gam, Rm)
           - np.einsum("pmj,ipkl->mijkl", Gam, Rm)
           - np.einsum("pmk,ijpl->mijkl", Gam, Rm)
           - np.einsum("pml,ijkp->mijkl", Gam, Rm))
    nab_f = np.einsum("mijkl,mz,ia,jb,kc,ld->zabcd", nab, F, F, F, F, F)
    return _to_operator(nab_f)


def nabla_R(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP,
            second_step: float = SECOND_STEP, nabla_step: float = NABLA_STEP,
            richardson: bool = False) -> np.ndarray:
    """``(nabla_Z Rop)`` for each orthonormal frame vector ``Z``; shape ``(n, N, N)``."""
    return curvature(chart, x, step, second_step, richardson, True, nabla_step).nabla


def nabla_riemann_coordinates(chart: ChartMetric, x: np.ndarray, step: float = FIRST_STEP,
                              second_step: float = SECOND_STEP,
                              nabla_step: float = NABLA_STEP) -> np.ndarray:
    """``nablaRm[m, i, j, k, l] = (nabla_m Rm)_{ijkl}`` in coordinates."""
    x = chart.check_point(x, 2 * second_step + nabla_step)
    n = chart.dim
    E = _offsets(n, nabla_step)
    Rm = riemann_coordinates(chart, x, step, second_step, check=False)
    dRm = np.stack([
        (riemann_coordinates(chart, x + E[m], step, second_step, check=False)
         - riemann_coordinates(chart, x - E[m], step, second_step, check=False))
        / (2 * nabla_step) for m in range(n)])
    Gam = christoffel(chart, x, step)
    return (dRm
            - np.einsum("pmi,pjkl->mijkl", Gam, Rm)
            - np.einsum("pmj,ipkl->mijkl", Gam, Rm)
            - np.einsum("pmk,ijpl->mijkl", Gam, Rm)
            - np.einsum("pml,ijkp->mijkl", Gam, Rm))


def sectional_curvature(chart: ChartMetric, x: np.ndarray, u: np.ndarray, v: np.ndarray, **kw) -> float:
    """Sectional curvature of the plane spanned by coordinate vectors ``u, v``."""
    Rm = riemann_coordinates(chart, x, **kw)
    g = chart.g(np.asarray(x, dtype=float))
    num = np.einsum("ijkl,i,j,k,l->", Rm, u, v, v, u)
    den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
    return float(num / den)


def curvature_operator_3d(rho: np.ndarray, s: float) -> np.ndarray:
    """``Rop(X ^ Y) = -(s/2) X ^ Y + rho(X) ^ Y + X ^ rho(Y)`` on 3-dim 2-vectors."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (3, 3):
        raise linalg.DimensionError("the 3-dimensional curvature formula needs a 3x3 rho")
    pairs = linalg.pair_list(3)
    I = np.eye(3)
    cols = []
    for i, j in pairs:
        cols.append(-0.5 * s * linalg.wedge(I[i], I[j])
                    + linalg.wedge(rho @ I[i], I[j]) + linalg.wedge(I[i], rho @ I[j]))
    return np.stack(cols, axis=1)


# --------------------------------------------------------------------------
# model charts


def flat_chart(n: int, half_width: float = 1.0) -> ChartMetric:
    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()

    def dmetric(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n))

    return ChartMetric(n, metric, -half_width * np.ones(n), half_width * np.ones(n),
                       label=f"flat(n={n})", metric_derivative=dmetric,
                       params={"kind": "flat", "n": n})


def space_form_chart(nu: float, n: int, exact_derivative: bool = True) -> ChartMetric:
    """Conformal model ``g = delta / (1 + nu |x|^2 / 4)^2`` on the box ``|x|_inf < 1``."""
    if nu < 0:
        raise ValueError("only nu >= 0 is supported")
    if nu == 0:
        return flat_chart(n)
    I = np.eye(n)

    def metric(x):
        x = np.asarray(x, dtype=float)
        omega = 1.0 + 0.25 * nu * np.sum(x * x, axis=-1)
        return I / (omega ** 2)[..., None, None]

    def dmetric(x):
        x = np.asarray(x, dtype=float)
        omega = 1.0 + 0.25 * nu * np.sum(x * x, axis=-1)
        # d_k omega^-2 = -nu x_k / omega^3
        c = -nu * x / (omega ** 3)[..., None]
        return c[..., :, None, None] * I

    return ChartMetric(n, metric, -np.ones(n), np.ones(n), label=f"space_form(nu={nu}, n={n})",
                       metric_derivative=dmetric if exact_derivative else None,
                       params={"kind": "space_form", "nu": nu, "n": n})


def scaled_chart(chart: ChartMetric, c: float) -> ChartMetric:
    dm = None
    if chart.metric_derivative is not None:
        dm = lambda x: c * chart.dg(x)
    return ChartMetric(chart.dim, lambda x: c * chart.g(x), chart.lower, chart.upper,
                       label=f"{c}*{chart.label}", metric_derivative=dm,
                       params={**chart.params, "scale": c})


def perturbed_space_form_chart(nu: float, n: int, amplitude: float = 0.2, width: float = 0.5,
                               seed=0) -> ChartMetric:
    """Space form plus a Gaussian bump: ``g + A exp(-|x - c|^2 / w^2) S``.

    ``S`` is a random symmetric matrix with unit spectral norm and ``c`` a
    random centre in ``[-0.3, 0.3]^n``; ``amplitude < 0.25`` keeps ``g`` positive.
    """
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n))
    S = Z + Z.T
    S /= np.abs(np.linalg.eigvalsh(S)).max()
    centre = rng.uniform(-0.3, 0.3, size=n)
    base = space_form_chart(nu, n) if nu > 0 else flat_chart(n)

    def metric(x):
        x = np.asarray(x, dtype=float)
        bump = amplitude * np.exp(-np.sum((x - centre) ** 2, axis=-1) / width ** 2)
        return base.g(x) + bump[..., None, None] * S

    return ChartMetric(n, metric, -np.ones(n), np.ones(n),
                       label=f"perturbed_space_form(nu={nu}, n={n}, seed={seed})",
                       params={"kind": "perturbed_space_form", "nu": nu, "n": n,
                               "amplitude": amplitude, "width": width, "seed": seed})


def chart_by_name(name: str, n: int, nu: float = 1.0, **kw) -> ChartMetric:
    if name == "flat":
        return flat_chart(n)
    if name == "space_form":
        return space_form_chart(nu, n)
    if name == "perturbed_space_form":
        return perturbed_space_form_chart(nu, n, **kw)
    raise ValueError(f"unknown chart {name!r}")


def curvature_report(data: CurvatureData) -> dict:
    """JSON-ready summary of a ``CurvatureData``."""
    out = {
        "point": data.point.tolist(),
        "frame": data.frame.tolist(),
        "curvature_operator": data.operator.tolist(),
        "ricci": data.ricci.tolist(),
        "scalar": data.scalar,
    }
    if data.nabla is not None:
        out["nabla_curvature_operator"] = data.nabla.tolist()
    return out
