"""Batch front end.  Exit codes: 0 pass, 1 verdict mismatch, 2 usage error."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np

from . import contact_structures as cs
from . import eta_einstein as ee
from . import geometry_engine as ge
from . import twistor as tw
from .linalg import random_orthogonal

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad t grid {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3, help="base dimension (odd, >= 3)")
    common.add_argument("--nu", type=float, default=1.0, help="constant curvature of the base")
    common.add_argument("--t", type=float, default=None, help="fiber scale t (default 1/(2 nu))")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--step", type=float, default=ge.SECOND_STEP,
                        help="curvature stencil step; first derivatives use step/5")
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (falls back to $TWISTOR_THREADS, then 1)")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    p = argparse.ArgumentParser(prog="twistor-eta", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-theorem", parents=[common],
                   help="fit a, b on the twistor space of a space form")
    sub.add_parser("oracle-compare", parents=[common],
                   help="Sasaki-chart finite-difference Ricci versus the closed form (n = 3)")
    sc = sub.add_parser("scan", parents=[common], help="fit residual over a grid of t (CSV)")
    sc.add_argument("--t-grid", type=_float_list, default=None,
                    help="comma-separated t values (default 50 points up to 1/nu)")
    sc.add_argument("--json", action="store_true", help="emit the JSON summary instead of CSV")
    ob = sub.add_parser("obstructions", parents=[common], help="curvature identities forced by eta-Einstein")
    ob.add_argument("--chart", default="space_form",
                    choices=["space_form", "space_form_chart", "perturbed_space_form"],
                    help="space_form uses the closed-form curvature; the others difference a chart")
    sub.add_parser("fiber-checks", parents=[common], help="fiber dimension and scalar curvature")
    cv = sub.add_parser("curvature", parents=[common], help="curvature report of a named chart")
    cv.add_argument("--chart", default="space_form", choices=["flat", "space_form", "perturbed_space_form"])
    return p


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("TWISTOR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"TWISTOR_THREADS must be an integer, got {env!r}")
    return 1


@contextmanager
def _mapper(workers: int):
    if workers <= 1:
        yield map
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield pool.map


def validate(args) -> None:
    if args.n < 3 or args.n % 2 == 0:
        raise UsageError(f"--n must be odd and >= 3, got {args.n}")
    if not args.nu > 0:
        raise UsageError("--nu must be positive")
    if args.t is None:
        args.t = 0.5 / args.nu
    if not args.t > 0:
        raise UsageError("--t must be positive")
    if not (1e-6 <= args.step <= 1e-2):
        raise UsageError("--step must lie in [1e-6, 1e-2]")
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be positive")
    if args.tolerance is not None and not args.tolerance > 0:
        raise UsageError("--tolerance must be positive")
    grid = getattr(args, "t_grid", None)
    if grid is not None and (not grid or min(grid) <= 0):
        raise UsageError("--t-grid must be a non-empty list of positive values")


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _envelope(command: str, args, body: dict, ok: bool) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "passed": bool(ok), **body}


# --------------------------------------------------------------------------
# commands


def cmd_verify_theorem(args) -> tuple[int, str]:
    tol = args.tolerance or ee.THEOREM_TOL
    per_point = args.samples or 64
    rep = ee.verify_theorem(args.nu, args.t, args.n, args.seed, per_point=per_point, tol=tol)
    rep["verdict"] = "eta-Einstein" if rep["eta_einstein"] else "not eta-Einstein"
    ok = rep["verdict_ok"]
    return (EXIT_OK if ok else EXIT_MISMATCH), _dump_json(_envelope("verify-theorem", args, rep, ok))


def cmd_oracle_compare(args) -> tuple[int, str]:
    if args.n != 3:
        raise UsageError("oracle-compare is defined for n = 3 only")
    tol = args.tolerance or 1e-3
    count = args.samples or 20
    per_point = 4
    points = -(-count // per_point)
    with _mapper(_threads(args)) as m:
        records = tw.oracle_compare(args.nu, args.t, points, per_point, args.seed,
                                    step=args.step / 5, second_step=args.step, map_fn=m)
    records = records[:count]
    worst = max(records, key=lambda r: r["relative_deviation"])
    ok = worst["relative_deviation"] <= tol
    body = {
        "params": {"n": 3, "nu": args.nu, "t": args.t, "seed": args.seed, "step": args.step,
                   "samples": len(records), "tolerance": tol},
        "max_relative_deviation": worst["relative_deviation"],
        "records": records,
    }
    if not ok:
        body["counterexample"] = worst
    return (EXIT_OK if ok else EXIT_MISMATCH), _dump_json(_envelope("oracle-compare", args, body, ok))


def default_grid(nu: float, count: int = 50) -> list[float]:
    """``count`` evenly spaced values ending at ``1/nu``; contains ``1/(2 nu)`` for even ``count``."""
    return [float(v) for v in np.linspace(1.0 / count, 1.0, count) / nu]


def cmd_scan(args) -> tuple[int, str]:
    tol = args.tolerance or ee.THEOREM_TOL
    grid = args.t_grid or default_grid(args.nu)
    per_point = args.samples or 64
    with _mapper(_threads(args)) as m:
        parts = list(m(lambda t: ee.scan_t(args.nu, args.n, [t], args.seed, per_point=per_point), grid))
    rows = [p["rows"][0] for p in parts]
    res = np.array([r["residual"] for r in rows])
    i = int(np.argmin(res))
    theorem_t = 0.5 / args.nu
    if args.n == 3:
        nearest = int(np.argmin([abs(t - theorem_t) for t in grid]))
        exact = abs(grid[nearest] - theorem_t) <= 1e-12
        ok = i == nearest and (res[i] <= tol) == exact
    else:
        ok = bool(np.all(res > tol))
    if args.json:
        away = [r["residual"] for r in rows if abs(r["t"] * args.nu - 0.5) >= 0.1]
        body = {"params": {"n": args.n, "nu": args.nu, "seed": args.seed}, "rows": rows,
                "argmin_t": grid[i], "min_residual": float(res[i]), "theorem_t": theorem_t,
                "floor_away_from_theorem": min(away) if away else None}
        return (EXIT_OK if ok else EXIT_MISMATCH), _dump_json(_envelope("scan", args, body, ok))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "a", "b", "residual"])
    for r in rows:
        w.writerow([repr(r["t"]), repr(r["a"]), repr(r["b"]), repr(r["residual"])])
    return (EXIT_OK if ok else EXIT_MISMATCH), buf.getvalue()


def cmd_obstructions(args) -> tuple[int, str]:
    closed_form = args.chart == "space_form"
    tol = args.tolerance or (1e-10 if closed_form else 1e-5)
    count = args.samples or 8
    n, k = args.n, (args.n - 1) // 2
    fitted = ee.fit(ee.space_form_samples(args.nu, args.t, n, args.seed, points=4, per_point=32))
    rng = np.random.default_rng(args.seed)
    if args.chart == "space_form_chart":
        chart = ge.space_form_chart(args.nu, n)
    elif args.chart == "perturbed_space_form":
        chart = ge.perturbed_space_form_chart(args.nu, n, seed=args.seed)
    records = []
    for _ in range(count):
        x = rng.uniform(-0.3, 0.3, n)
        if closed_form:
            data = tw.space_form_curvature(args.nu, n)
        else:
            data = ge.curvature(chart, x, step=args.step / 5, second_step=args.step)
        frame = random_orthogonal(n, rng.integers(2 ** 63))
        X = rng.standard_normal(n)
        rep = ee.obstruction_residuals(data.operator, frame, X, args.t, fitted.a, fitted.b, data.scalar)
        records.append({"point": x.tolist(), "X": X.tolist(), "frame": frame.tolist(), **rep.as_dict()})
    keys = ["cross_pair_sum", "cross_pair", "disjoint_orthogonality", "norm_equality", "scalar_identity"]
    worst = {kk: max((r[kk] for r in records if r[kk] is not None), default=None) for kk in keys}
    obstructed = fitted.residual > ee.THEOREM_TOL or any(v is not None and v > tol for v in worst.values())
    expected = args.chart == "perturbed_space_form" or not ee.is_theorem_point(n, args.nu, args.t)
    ok = obstructed == expected
    body = {
        "params": {"n": n, "k": k, "nu": args.nu, "t": args.t, "seed": args.seed, "chart": args.chart,
                   "tolerance": tol},
        "fit": fitted.as_dict(),
        "max_residuals": worst,
        "obstructed": bool(obstructed),
        "expected_obstructed": bool(expected),
        "records": records,
    }
    return (EXIT_OK if ok else EXIT_MISMATCH), _dump_json(_envelope("obstructions", args, body, ok))


def cmd_fiber_checks(args) -> tuple[int, str]:
    tol = args.tolerance or 1e-3
    n, k = args.n, (args.n - 1) // 2
    count = args.samples or 3
    rng = np.random.default_rng(args.seed)
    dims = [cs.tangent_dimension(cs.random_structure(n, rng.integers(2 ** 63)).phi) for _ in range(count)]
    chart = cs.fiber_chart(n)
    closed = cs.fiber_scalar_curvature(n, k)
    numeric = []
    for _ in range(count):
        y = rng.uniform(-0.2, 0.2, chart.dim)
        numeric.append(ge.curvature(chart, y, step=args.step / 5, second_step=args.step).scalar)
    err = max(abs(s - closed) for s in numeric)
    ok = all(d == cs.fk_dimension(n, k) for d in dims) and err <= tol
    body = {
        "params": {"n": n, "k": k, "seed": args.seed, "tolerance": tol, "step": args.step},
        "dimension_expected": cs.fk_dimension(n, k),
        "dimension_by_rank": dims,
        "scalar_curvature_expected": closed,
        "scalar_curvature_numeric": numeric,
        "max_error": err,
    }
    return (EXIT_OK if ok else EXIT_MISMATCH), _dump_json(_envelope("fiber-checks", args, body, ok))


def cmd_curvature(args) -> tuple[int, str]:
    chart = ge.chart_by_name(args.chart, args.n, args.nu) if args.chart != "perturbed_space_form" \
        else ge.perturbed_space_form_chart(args.nu, args.n, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    reports = []
    for _ in range(args.samples or 1):
        x = rng.uniform(-0.3, 0.3, args.n)
        data = ge.curvature(chart, x, step=args.step / 5, second_step=args.step, with_nabla=True)
        reports.append(ge.curvature_report(data))
    body = {"params": {"chart": chart.label, **{k: v for k, v in chart.params.items()}},
            "reports": reports}
    return EXIT_OK, _dump_json(_envelope("curvature", args, body, True))


COMMANDS = {
    "verify-theorem": cmd_verify_theorem,
    "oracle-compare": cmd_oracle_compare,
    "scan": cmd_scan,
    "obstructions": cmd_obstructions,
    "fiber-checks": cmd_fiber_checks,
    "curvature": cmd_curvature,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        validate(args)
        code, text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
