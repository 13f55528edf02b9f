"""Fitting and testing the eta-Einstein condition ``Ric = a h + b eta (x) eta``."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import contact_structures as cs
from . import linalg
from .twistor import (TwistorTangent, chi, eta_t, horizontal_equation_lhs, vertical_equation_lhs, h_t, ricci_const_curv,
                      space_form_curvature, twistor_scalar_curvature)

THEOREM_TOL = 1e-9
MAX_CONDITION = 1e12


class DegenerateDesignError(ValueError):
    pass


class Sample(NamedTuple):
    h: float
    eta: float
    c: float
    E: TwistorTangent | None = None
    sigma: cs.AlmostContactStructure | None = None


@dataclass
class EtaEinsteinFit:
    a: float
    b: float
    residual: float
    worst: int
    condition: float
    n_samples: int

    def as_dict(self) -> dict:
        return asdict(self)


def fit(samples: Sequence[Sample] | np.ndarray) -> EtaEinsteinFit:
    """Least-squares ``(a, b)`` for ``c = a h + b eta^2`` with a max-normalized residual."""
    if isinstance(samples, np.ndarray):
        arr = np.asarray(samples, dtype=float)
    else:
        arr = np.array([[s[0], s[1], s[2]] for s in samples], dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise DegenerateDesignError("need at least 3 samples")
    h, eta, c = arr[:, 0], arr[:, 1], arr[:, 2]
    D = np.column_stack([h, eta * eta])
    N = D.T @ D
    cond = float(np.linalg.cond(N)) if np.all(np.isfinite(N)) else np.inf
    if not cond < MAX_CONDITION:
        raise DegenerateDesignError(f"design matrix is degenerate (condition {cond:.3g})")
    a, b = np.linalg.solve(N, D.T @ c)
    r = np.abs(c - a * h - b * eta * eta) / np.maximum(1.0, h)
    worst = int(np.argmax(r))
    return EtaEinsteinFit(float(a), float(b), float(r[worst]), worst, cond, len(h))


# --------------------------------------------------------------------------
# sampling


def _unit(E: TwistorTangent, sigma, t) -> TwistorTangent:
    return E * (1.0 / np.sqrt(h_t(E, E, sigma, t, check=False)))


def sample_tangents(sigma: cs.AlmostContactStructure, t: float, count: int,
                    rng: np.random.Generator) -> list[TwistorTangent]:
    """``count`` h_t-unit tangents: chi, a horizontal vector orthogonal to xi, a vertical one, then random mixes."""
    n = sigma.n
    X = rng.standard_normal(n)
    X -= (X @ sigma.xi) * sigma.xi
    out = [chi(sigma), TwistorTangent.horizontal(X), TwistorTangent.vertical(cs.random_tangent(sigma.phi, rng))]
    while len(out) < count:
        kind = len(out) % 3
        Q = cs.random_tangent(sigma.phi, rng)
        X = rng.standard_normal(n)
        if kind == 0:
            E = TwistorTangent.horizontal(X)
        elif kind == 1:
            E = TwistorTangent.vertical(Q)
        else:
            E = TwistorTangent(X, Q)
        out.append(E)
    return [_unit(E, sigma, t) for E in out[:count]]


def space_form_samples(nu: float, t: float, n: int, seed, points: int = 8,
                       per_point: int = 64) -> list[Sample]:
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(points):
        sigma = cs.random_structure(n, rng.integers(2 ** 63))
        for E in sample_tangents(sigma, t, per_point, rng):
            samples.append(Sample(h_t(E, E, sigma, t, check=False), eta_t(E, sigma),
                                  ricci_const_curv(E, sigma, nu, t), E, sigma))
    return samples


def _sample_record(s: Sample) -> dict:
    out = {"h_t": s.h, "eta": s.eta, "c_t": s.c}
    if s.E is not None:
        out["X"] = s.E.X.tolist()
        out["Q"] = s.E.Q.tolist()
    if s.sigma is not None:
        out["phi"] = s.sigma.phi.tolist()
        out["xi"] = s.sigma.xi.tolist()
    return out


# --------------------------------------------------------------------------
# theorem


def threedim_diagnostics(rho: np.ndarray, s: float, t: float, a: float, k: int = 1) -> dict:
    """Scalars of the three-dimensional argument: ``mu``, ``b_bar`` and ``lambda``.

    ``3 b_bar = t [mu - sum_i (s/2 - c_ii)^2]`` with ``mu`` the sum of squared
    off-diagonal Ricci entries; ``lambda = (a t - k/2) / (2 t^2)``.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (3, 3):
        raise linalg.DimensionError("three-dimensional diagnostics need a 3x3 Ricci matrix")
    mu = rho[0, 1] ** 2 + rho[1, 2] ** 2 + rho[0, 2] ** 2
    b_bar = t * (mu - np.sum((0.5 * s - np.diag(rho)) ** 2)) / 3.0
    lam = (a * t - 0.5 * k) / (2 * t * t)
    return {"mu": float(mu), "b_bar": float(b_bar), "lambda": float(lam)}


def scalar_identity_residual(s_base: float, t: float, k: int, a: float, b: float) -> float:
    """``|s + (k^3 + k^2)/t - (2k^2 + 4k + 1) a - b|``."""
    return abs(s_base + (k ** 3 + k ** 2) / t - (2 * k * k + 4 * k + 1) * a - b)


def trace_checks(nu: float, t: float, n: int, a: float, b: float, seed=0) -> dict:
    """Trace identities at a random point of the twistor space of a space form."""
    sigma = cs.random_structure(n, seed)
    k = sigma.k
    dim = n + k * k + k
    form = lambda E: ricci_const_curv(E, sigma, nu, t)
    s_tw = twistor_scalar_curvature(sigma, t, form)
    c_chi = form(chi(sigma))
    s_base = n * (n - 1) * nu
    out = {
        "twistor_scalar": s_tw,
        "trace_s": abs(s_tw - (dim * a + b)),
        "ricci_chi": abs(c_chi - (a + b)),
        "lemma1": scalar_identity_residual(s_base, t, k, a, b),
    }
    if n == 3:
        diag = threedim_diagnostics(2 * nu * np.eye(3), s_base, t, a, k)
        out["eq_b"] = abs(diag["b_bar"] - b)
        out["diagnostics"] = diag
    return out


def is_theorem_point(n: int, nu: float, t: float, tol: float = 1e-12) -> bool:
    return n == 3 and nu > 0 and abs(t * nu - 0.5) <= tol


def verify_theorem(nu: float, t: float, n: int, seed=0, points: int = 8, per_point: int = 64,
                   tol: float = THEOREM_TOL) -> dict:
    """Fit the Ricci form of the twistor space of a space form and compare with the expected verdict."""
    if not (nu > 0 and t > 0):
        raise ValueError("nu and t must be positive")
    k = (n - 1) // 2
    samples = space_form_samples(nu, t, n, seed, points, per_point)
    f = fit(samples)
    eta_einstein = f.residual <= tol
    expected = is_theorem_point(n, nu, t)
    checks = trace_checks(nu, t, n, f.a, f.b, seed)
    report = {
        "params": {"n": n, "k": k, "nu": nu, "t": t, "seed": seed},
        "fit": {"a": f.a, "b": f.b, "residual": f.residual, "condition": f.condition,
                "samples": f.n_samples},
        "checks": checks,
        "eta_einstein": bool(eta_einstein),
        "expected_eta_einstein": expected,
    }
    if expected:
        report["checks"]["a_expected"] = 1.5 * nu
        report["checks"]["b_expected"] = -0.5 * nu
        report["checks"]["a_error"] = abs(f.a - 1.5 * nu)
        report["checks"]["b_error"] = abs(f.b + 0.5 * nu)
        report["verdict_ok"] = bool(eta_einstein and report["checks"]["a_error"] <= tol
                                    and report["checks"]["b_error"] <= tol)
    else:
        report["verdict_ok"] = bool(not eta_einstein)
    if not eta_einstein:
        report["counterexample"] = _sample_record(samples[f.worst])
    return report


def final_display_residual(nu: float, count: int = 1000, seed=0, n: int = 3) -> float:
    """Max of ``|c_t(E,E) - (3 nu/2) |E|^2 + (nu/2) g(X, xi)^2|`` at ``t = 1/(2 nu)``."""
    t = 0.5 / nu
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        sigma = cs.random_structure(n, rng.integers(2 ** 63))
        E = TwistorTangent(rng.standard_normal(n), cs.random_tangent(sigma.phi, rng))
        lhs = ricci_const_curv(E, sigma, nu, t)
        rhs = 1.5 * nu * h_t(E, E, sigma, t, check=False) - 0.5 * nu * eta_t(E, sigma) ** 2
        worst = max(worst, abs(lhs - rhs))
    return worst


def scan_t(nu: float, n: int, t_grid: Iterable[float], seed=0, points: int = 8,
           per_point: int = 64) -> dict:
    """Fit residual as a function of ``t`` with the same random structures at each ``t``."""
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ValueError("empty t grid")
    rows = []
    for t in grid:
        f = fit(space_form_samples(nu, t, n, seed, points, per_point))
        rows.append({"t": t, "a": f.a, "b": f.b, "residual": f.residual})
    res = np.array([r["residual"] for r in rows])
    i = int(np.argmin(res))
    theorem_t = 0.5 / nu
    away = [r["residual"] for r in rows if abs(r["t"] * nu - 0.5) >= 0.1]
    return {
        "params": {"n": n, "nu": nu, "seed": seed},
        "rows": rows,
        "argmin_t": grid[i],
        "min_residual": float(res[i]),
        "theorem_t": theorem_t,
        "floor_away_from_theorem": float(min(away)) if away else None,
    }


# --------------------------------------------------------------------------
# obstructions


@dataclass
class ObstructionReport:
    cross_pair_sum: float | None
    cross_pair: float | None
    disjoint_orthogonality: float | None
    norm_equality: float | None
    scalar_identity: float | None
    norm_Q1: float | None = None
    norm_Q2: float | None = None
    ratio: float | None = None
    implied_norm: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _R(operator: np.ndarray, w: np.ndarray, X: np.ndarray) -> np.ndarray:
    return linalg.wedge_to_endo(operator @ w) @ X


def obstruction_residuals(operator: np.ndarray, frame: np.ndarray, X: np.ndarray, t: float,
                          a: float | None = None, b: float | None = None,
                          s: float | None = None) -> ObstructionReport:
    """Evaluate the identities that an eta-Einstein twistor space forces on the base curvature.

    ``frame`` columns are an orthonormal basis ``e_1, ..., e_n``; ``X`` is a
    vector in the same coordinates as ``operator``.  For ``n = 3`` only the
    scalar identity and nothing index-based is evaluated.
    """
    frame = np.asarray(frame, dtype=float)
    if not linalg.is_orthonormal(frame):
        raise linalg.DegenerateFrameError("frame is not orthonormal")
    n = frame.shape[0]
    k = (n - 1) // 2
    X = np.asarray(X, dtype=float)
    e = lambda i, j: linalg.wedge(frame[:, i - 1], frame[:, j - 1])  # 1-based
    RX = lambda i, j: _R(operator, e(i, j), X)

    scalar = None if a is None or s is None else scalar_identity_residual(s, t, k, a, b or 0.0)
    if n < 5:
        return ObstructionReport(None, None, None, None, scalar)

    def block(q):
        return RX(1, 2 * q - 1) @ RX(2, 2 * q) - RX(1, 2 * q) @ RX(2, 2 * q - 1)

    cross_pair_sum = abs(sum(block(q) for q in range(2, k + 1)))
    cross_pair = abs(block(2))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    vecs = {p: RX(*p) for p in pairs}
    disjoint_orthogonality = 0.0
    for p in pairs:
        for q in pairs:
            if len({*p, *q}) == 4:
                disjoint_orthogonality = max(disjoint_orthogonality, abs(vecs[p] @ vecs[q]))
    norms = np.array([np.linalg.norm(v) for v in vecs.values()])
    norm_equality = float(norms.max() - norms.min())

    q1 = e(1, 3) - e(2, 4)
    q2 = e(1, n)
    n1 = float(np.sum((operator @ q1) ** 2))
    n2 = float(np.sum((operator @ q2) ** 2))
    implied = None if a is None else (a * t - 0.5 * k) / (t * t)
    return ObstructionReport(float(cross_pair_sum), float(cross_pair), float(disjoint_orthogonality), norm_equality, scalar,
                             n1, n2, n1 / n2 if n2 > 0 else None, implied)


def ratio_witness(nu: float, n: int) -> float:
    """``|Rop(Q1)|^2 / |Rop(Q2)|^2`` for a space form; the eta-Einstein equations would force 1."""
    rep = obstruction_residuals(nu * np.eye(linalg.bivector_dim(n)), np.eye(n), np.ones(n), 0.5)
    return rep.ratio


def eta_einstein_equation_residuals(nu: float, t: float, n: int, a: float, b: float, seed=0) -> dict:
    """Residuals of the horizontal and vertical eta-Einstein equations at a random point."""
    rng = np.random.default_rng(seed)
    sigma = cs.random_structure(n, rng.integers(2 ** 63))
    curv = space_form_curvature(nu, n)
    X = rng.standard_normal(n)
    Q = cs.random_tangent(sigma.phi, rng)
    r_hor = horizontal_equation_lhs(X, sigma, curv.operator, curv.ricci, t) - (a * X @ X + b * (X @ sigma.xi) ** 2)
    r_ver = vertical_equation_lhs(Q, sigma, curv.operator, t) - a * t * cs.fiber_metric_h(Q, Q, sigma.phi, check=False)
    return {"horizontal": abs(float(r_hor)), "vertical": abs(float(r_ver))}
