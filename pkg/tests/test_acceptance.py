"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` (or execute this file) to see the lines.
"""
import sys
import time

import numpy as np
import pytest

from twistor_eta import cli
from twistor_eta import contact_structures as cs
from twistor_eta import eta_einstein as ee
from twistor_eta import geometry_engine as ge
from twistor_eta import linalg
from twistor_eta import twistor as tw

NUS = (0.5, 1.0, 2.0)


@pytest.fixture
def report(capsys):
    def _report(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return _report


def test_01_theorem_reproduction(report):
    worst_ab, worst_res, worst_time = 0.0, 0.0, 0.0
    for nu in NUS:
        t0 = time.perf_counter()
        f = ee.fit(ee.space_form_samples(nu, 0.5 / nu, 3, seed=1))
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_ab = max(worst_ab, abs(f.a - 1.5 * nu), abs(f.b + 0.5 * nu))
        worst_res = max(worst_res, f.residual)
    ok = worst_ab <= 1e-9 and worst_res <= 1e-9 and worst_time < 1.0
    report(1, "theorem reproduction", ok,
           f"max|a-3nu/2|,|b+nu/2| = {worst_ab:.2e}, residual {worst_res:.2e}, slowest {worst_time:.3f}s")


def test_02_final_display_identity(report):
    worst = max(ee.final_display_residual(nu, count=1000, seed=2) for nu in NUS)
    report(2, "final display identity", worst <= 1e-12, f"max deviation {worst:.2e} over 3x1000 samples")


def test_03_uniqueness_scan(report):
    details, ok = [], True
    for nu in (1.0, 2.0):
        t0 = time.perf_counter()
        grid = cli.default_grid(nu, 50)
        sc = ee.scan_t(nu, 3, grid, seed=3)
        elapsed = time.perf_counter() - t0
        nearest = grid[int(np.argmin([abs(t - 0.5 / nu) for t in grid]))]
        floor = sc["floor_away_from_theorem"]
        ok &= (sc["argmin_t"] == nearest and abs(nearest - 0.5 / nu) < 1e-12
               and sc["min_residual"] <= 1e-9 and floor >= 1e-2 and elapsed < 10)
        details.append(f"nu={nu}: argmin {sc['argmin_t']:.4f}, min {sc['min_residual']:.1e}, "
                       f"floor(|t nu-1/2|>=0.1) {floor:.3e}, {elapsed:.2f}s")
    report(3, "uniqueness scan", ok, "; ".join(details))


def test_04_negative_result_high_dim(report):
    details, ok = [], True
    for n in (5, 7):
        sc = ee.scan_t(1.0, n, cli.default_grid(1.0, 50), seed=4, points=4, per_point=32)
        ratio = ee.ratio_witness(1.0, n)
        ok &= sc["min_residual"] > 1e-6 and abs(ratio - 2.0) <= 1e-9
        details.append(f"n={n}: min residual {sc['min_residual']:.3e}, ratio {ratio:.12f}")
    report(4, "negative result n>=5", ok, "; ".join(details))


def test_05_oracle_equivalence(report):
    t0 = time.perf_counter()
    details, ok = [], True
    for nu, t in ((1.0, 0.5), (2.0, 0.25)):
        recs = tw.oracle_compare(nu, t, n_points=6, tangents_per_point=4, seed=5)
        dev = max(r["relative_deviation"] for r in recs)
        ok &= len(recs) >= 20 and dev <= 1e-3
        details.append(f"(nu,t)=({nu},{t}): {len(recs)} samples, max rel dev {dev:.2e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(5, "oracle equivalence", ok, "; ".join(details) + f"; {elapsed:.2f}s")


def test_06_general_ricci_collapse(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for n in (3, 5, 7):
        for _ in range(1000):
            nu, t = rng.uniform(0.2, 3.0), rng.uniform(0.05, 2.0)
            s = cs.random_structure(n, rng.integers(2 ** 63))
            E = tw.random_tangent(s, rng)
            curv = tw.space_form_curvature(nu, n)
            worst = max(worst, abs(tw.ricci_general(E, s, curv, t) - tw.ricci_const_curv(E, s, nu, t)))
    report(6, "general Ricci collapses to constant curvature", worst <= 1e-12, f"max |difference| {worst:.2e} on 3x1000")


def test_07_fiber_geometry(report):
    dims_ok = all(
        cs.tangent_dimension(cs.random_structure(n, seed).phi) == cs.fk_dimension(n, (n - 1) // 2)
        for n in (3, 5, 7) for seed in range(3))
    chart = cs.fiber_chart(3)
    rng = np.random.default_rng(7)
    err = max(abs(ge.curvature(chart, rng.uniform(-0.2, 0.2, 2)).scalar - cs.fiber_scalar_curvature(3, 1))
              for _ in range(3))
    report(7, "fiber geometry", dims_ok and err <= 1e-3,
           f"rank dimensions match for n=3,5,7: {dims_ok}; scalar curvature error {err:.2e}")


def test_08_structural_invariants(report):
    rng = np.random.default_rng(8)
    worst = {"phi^3+phi": 0.0, "h_t compat": 0.0, "eta(chi)": 0.0, "J tangency": 0.0, "basis": 0.0}
    for i in range(1000):
        n = (3, 5, 7)[i % 3]
        t = rng.uniform(0.1, 2.0)
        alpha = 1 + i % 2
        s = cs.random_structure(n, rng.integers(2 ** 63))
        E, F = tw.random_tangent(s, rng), tw.random_tangent(s, rng)
        P1 = tw.phi_structures(E, s, alpha)
        P3 = tw.phi_structures(tw.phi_structures(P1, s, alpha), s, alpha)
        worst["phi^3+phi"] = max(worst["phi^3+phi"], np.abs(P3.X + P1.X).max(), np.abs(P3.Q + P1.Q).max())
        lhs = tw.h_t(P1, tw.phi_structures(F, s, alpha), s, t)
        rhs = tw.h_t(E, F, s, t) - tw.eta_t(E, s) * tw.eta_t(F, s)
        worst["h_t compat"] = max(worst["h_t compat"], abs(lhs - rhs))
        worst["eta(chi)"] = max(worst["eta(chi)"], abs(tw.eta_t(tw.chi(s), s) - 1.0))
        JQ = cs.fiber_complex_structure(E.Q, s.phi)
        worst["J tangency"] = max(worst["J tangency"], np.abs(cs.tangency_residual(JQ, s.phi)).max())
        frame = linalg.random_orthogonal(n, rng.integers(2 ** 63))
        basis = cs.standard_vertical_basis(frame)
        phi = cs.structure_from_frame(frame).phi
        gram = np.array([[cs.fiber_metric_h(P, Q, phi, check=False) for Q in basis] for P in basis])
        worst["basis"] = max(worst["basis"], np.abs(gram - np.eye(len(basis))).max())
    ok = max(worst.values()) <= 1e-10
    report(8, "structural invariants", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_09_trace_consistency(report):
    worst = 0.0
    for nu in NUS:
        t = 0.5 / nu
        chk = ee.trace_checks(nu, t, 3, 1.5 * nu, -0.5 * nu, seed=9)
        worst = max(worst, chk["trace_s"], chk["ricci_chi"], chk["lemma1"],
                    abs(chk["twistor_scalar"] - 7 * nu))
        f = ee.fit(ee.space_form_samples(nu, t, 3, seed=9, points=2, per_point=32))
        fitted = ee.trace_checks(nu, t, 3, f.a, f.b, seed=9)
        worst = max(worst, fitted["trace_s"], fitted["ricci_chi"], fitted["lemma1"])
    lhs = 6.0 + (1 + 1) / 0.5
    report(9, "trace consistency", worst <= 1e-9,
           f"max residual {worst:.2e}; nu=1: s + (k^3+k^2)/t = {lhs:g} = 7a + b = {7 * 1.5 - 0.5:g}")


def test_10_curvature_engine_calibration(report):
    rng = np.random.default_rng(10)
    ch = ge.space_form_chart(1.0, 3)
    id_err = max(np.abs(ge.curvature_operator(ch, rng.uniform(-0.5, 0.5, 3)) - np.eye(3)).max()
                 for _ in range(5))
    co_err = 0.0
    for seed in range(5):
        data = ge.curvature(ge.perturbed_space_form_chart(1.0, 3, seed=seed), rng.uniform(-0.3, 0.3, 3))
        co_err = max(co_err, np.abs(ge.curvature_operator_3d(data.rho, data.scalar) - data.operator).max())
    report(10, "curvature engine calibration", id_err <= 1e-5 and co_err <= 1e-3,
           f"|R - Id| {id_err:.2e}, 3-d curvature formula cross-check {co_err:.2e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
