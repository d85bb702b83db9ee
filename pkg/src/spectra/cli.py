"""Command-line front end: spectra, bound checks and parameter sweeps.

Exit codes: 0 success (and, for bounds, every report satisfied), 1 config
error, 2 solver failure, 3 at least one bound violated.  Output is byte
deterministic for a fixed configuration; NaN or Inf anywhere in a report
is treated as a solver failure, never serialized.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds as B
from .cartesian import make_circle
from .density import make_density, density_to_dict, norm_ratio
from .expressions import ExpressionError, compile_expression
from .geometry import make_profile, profile_to_dict
from .radial import full_spectrum, lambda2, make_radial_grid

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VIOLATED = 3

BOUND_NAMES = ("hersch", "convex", "sandwich", "revolution", "semiclassical",
               "gap", "energy", "minmax", "weyl")

CSV_HEADER = "param,lambda2,norm_ratio,lhs,rhs,margin,satisfied,status"


class ConfigError(ValueError):
    pass


def _ensure_finite(obj, path="report"):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise RuntimeError(f"non-finite value at {path}")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _ensure_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _ensure_finite(v, f"{path}[{i}]")


def _write_json(obj, out):
    _ensure_finite(obj)
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    raw = os.environ.get("SPECTRA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _profile_from_args(args):
    kind = args.geometry
    if kind == "round_sphere":
        return make_profile("round_sphere", n=args.n)
    if kind == "flat_ball":
        return make_profile("flat_ball", R=args.R, n=args.n)
    if kind == "spheroid":
        return make_profile("spheroid", n=args.n, a=args.spheroid_a)
    raise ConfigError(f"unknown geometry {kind!r} (field: --geometry)")


def _density_from_args(args, profile):
    spec = args.density
    if spec == "constant":
        return make_density("constant", {}, profile)
    if spec == "gaussian":
        if args.j is None or args.j <= 0:
            raise ConfigError("gaussian density needs --j > 0 (field: --j)")
        return make_density("gaussian", {"j": args.j}, profile)
    if spec == "smoothed_gaussian":
        if args.j is None or args.j <= 0:
            raise ConfigError("smoothed_gaussian needs --j > 0 (field: --j)")
        return make_density("smoothed_gaussian",
                            {"j": args.j, "alpha": args.alpha}, profile)
    # anything else is a sigma(r) expression
    try:
        sig, sig1, sig2 = compile_expression(spec)
    except ExpressionError as exc:
        raise ConfigError(f"bad density {spec!r}: {exc} (field: --density)")
    probe = np.linspace(0.0, profile.R, 257)
    vals = np.asarray(sig(probe), dtype=float)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise ConfigError(
            f"density {spec!r} must be positive on [0, R] (field: --density)")

    def f(r):
        return -np.log(sig(r))

    def fp(r):
        return -sig1(r) / sig(r)

    def fpp(r):
        s, s1, s2 = sig(r), sig1(r), sig2(r)
        return -s2 / s + (s1 / s) ** 2

    d = make_density("custom", {"f": f, "f_prime": fp, "f_double_prime": fpp},
                     profile)
    return d


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}")


def cmd_spectrum(args) -> int:
    profile = _profile_from_args(args)
    density = _density_from_args(args, profile)
    grid = make_radial_grid(profile, density, args.n, args.grid)
    result = full_spectrum(profile, density, args.n, args.l_max,
                           args.k, grid)
    payload = result.to_dict()
    payload["geometry"] = profile_to_dict(profile)
    payload["density"] = density_to_dict(density)
    _write_json(payload, args.out)
    return EXIT_OK


def _bounds_dispatch(args):
    name = args.bound
    if name == "hersch":
        profile = make_profile("round_sphere", n=args.n)
        density = _density_from_args(args, profile)
        return [B.hersch_bound_check(density, args.n, m=args.grid)], {}
    if name == "convex":
        if args.j is None:
            raise ConfigError("convex check needs --j (field: --j)")
        rep = B.convex_lower_check(
            args.shape, args.j, n=args.n, R=args.R, a=args.a_side,
            b=args.b_side, m=args.grid, nx=args.nx, ny=args.ny)
        return [rep], {}
    if name == "sandwich":
        js = _float_list(args.j_sweep)
        reports, summary = B.sandwich_check(args.n, args.R, js, m=args.grid)
        return reports, summary
    if name == "revolution":
        profile = _profile_from_args(args)
        js = _float_list(args.j_sweep)
        reports, summary = B.revolution_lower_check(profile, js, m=args.grid,
                                                    alpha=args.alpha)
        return reports, summary
    if name == "semiclassical":
        try:
            f0, f0p, f0pp = compile_expression(args.f0)
        except ExpressionError as exc:
            raise ConfigError(f"bad --f0: {exc} (field: --f0)")
        eps = _float_list(args.eps_sweep)
        reports, summary = B.semiclassical_check(f0, f0p, f0pp, eps,
                                                 m=args.grid)
        return reports, summary
    if name == "gap":
        try:
            V, _, _ = compile_expression(args.potential)
        except ExpressionError as exc:
            raise ConfigError(f"bad --potential: {exc} (field: --potential)")
        return [B.gap_bound_check(V, args.k, m=args.grid)], {}
    if name == "energy":
        profile = _profile_from_args(args)
        density = _density_from_args(args, profile)
        grid = make_radial_grid(profile, density, args.n, args.grid)
        rng = np.random.default_rng(args.seed)
        reports = []
        for _ in range(args.count):
            a = B.random_annulus(profile, rng)
            reports.append(B.energy_bound_check(profile, density, args.n, a,
                                                grid))
        return reports, {}
    if name == "minmax":
        profile = _profile_from_args(args)
        density = _density_from_args(args, profile)
        grid = make_radial_grid(profile, density, args.n, args.grid)
        family = B.disjoint_annulus_family(profile, args.k)
        rep = B.minmax_upper_bound(profile, density, args.n, family, grid,
                                   nu=args.nu)
        reports = [rep]
        if args.optimize:
            _, rep_opt = B.optimize_annulus_family(profile, density, args.n,
                                                   family, grid, nu=args.nu)
            reports.append(rep_opt)
        return reports, {}
    if name == "weyl":
        profile = _profile_from_args(args)
        density = _density_from_args(args, profile)
        return [B.weyl_check(profile, density, args.n, k_max=args.k_max,
                             m=args.grid)], {}
    raise ConfigError(f"unknown bound {name!r} (field: bound)")


def cmd_bounds(args) -> int:
    reports, summary = _bounds_dispatch(args)
    payload = [rep.to_dict() for rep in reports]
    if summary:
        payload[-1]["params"]["sweep_summary"] = summary
    _write_json(payload, args.out)
    if not all(rep.satisfied for rep in reports):
        return EXIT_VIOLATED
    return EXIT_OK


def _sweep_values(args):
    if args.values:
        vals = _float_list(args.values)
    elif args.range:
        try:
            start, stop, factor = (float(v) for v in args.range.split(":"))
        except ValueError:
            raise ConfigError("--range must be start:stop:factor")
        if factor <= 1.0 or start <= 0:
            raise ConfigError("geometric range needs factor > 1 and start > 0")
        vals = []
        v = start
        while v <= stop * (1.0 + 1e-12):
            vals.append(v)
            v *= factor
    else:
        raise ConfigError("sweep needs --values or --range (field: --values)")
    if not vals:
        raise ConfigError("empty sweep")
    return vals


def _sweep_row_j(args, j):
    if args.geometry == "round_sphere":
        profile = make_profile("round_sphere", n=args.n)
        density = make_density("smoothed_gaussian", {"j": j, "alpha": args.alpha},
                               profile)
    else:
        profile = _profile_from_args(args)
        density = make_density("gaussian", {"j": j}, profile)
    grid = make_radial_grid(profile, density, args.n, args.grid)
    lam = lambda2(profile, density, args.n, grid)[0]
    ratio = norm_ratio(density, profile, args.n, grid)
    lhs = 2.0 * j
    return {"param": j, "lambda2": lam, "norm_ratio": ratio, "lhs": lhs,
            "rhs": lam, "margin": lam - lhs,
            "satisfied": lam >= lhs - 1e-6 * (abs(lam) + abs(lhs)) - args.tol_disc}


def _sweep_row_eps(args, eps):
    try:
        f0, f0p, f0pp = compile_expression(args.f0)
    except ExpressionError as exc:
        raise ConfigError(f"bad --f0: {exc} (field: --f0)")
    reports, _ = B.semiclassical_check(f0, f0p, f0pp, [eps], m=args.grid)
    rep = reports[0]
    dom = make_circle(2.0 * math.pi, m=args.grid)
    nodes = dom.n_cells[0]
    t = np.arange(nodes) * (2.0 * math.pi / nodes)
    sig = np.exp(-(np.asarray(f0(t)) - float(np.min(f0(t)))) / eps)
    ratio = float(np.max(sig) / (np.sum(sig) * 2.0 * math.pi / nodes))
    return {"param": eps, "lambda2": rep.params["lambda_m0"],
            "norm_ratio": ratio, "lhs": rep.lhs, "rhs": rep.rhs,
            "margin": rep.margin, "satisfied": rep.satisfied}


def _sweep_row_grid(args, m):
    profile = _profile_from_args(args)
    density = _density_from_args(args, profile)
    grid = make_radial_grid(profile, density, args.n, int(m))
    lam = lambda2(profile, density, args.n, grid)[0]
    ratio = norm_ratio(density, profile, args.n, grid)
    return {"param": m, "lambda2": lam, "norm_ratio": ratio, "lhs": lam,
            "rhs": lam, "margin": 0.0, "satisfied": True}


def cmd_sweep(args) -> int:
    values = _sweep_values(args)
    row_fn = {"j": _sweep_row_j, "eps": _sweep_row_eps,
              "grid": _sweep_row_grid}.get(args.var)
    if row_fn is None:
        raise ConfigError(f"unknown sweep variable {args.var!r} (field: --var)")

    def run(v):
        try:
            row = row_fn(args, v)
            _ensure_finite(row)
            row["status"] = "ok"
            return row
        except ConfigError:
            raise
        except Exception as exc:  # recorded per row, sweep continues
            return {"param": v, "lambda2": 0.0, "norm_ratio": 0.0, "lhs": 0.0,
                    "rhs": 0.0, "margin": 0.0, "satisfied": False,
                    "status": f"error: {exc}"}

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, values))
    else:
        rows = [run(v) for v in values]

    summary = {"var": args.var, "values": values}
    ok_rows = [r for r in rows if r["status"] == "ok"]
    if args.var == "grid" and len(ok_rows) >= 3:
        lams = [r["lambda2"] for r in ok_rows[-3:]]
        d1, d2 = lams[0] - lams[1], lams[1] - lams[2]
        if abs(d2) > 1e-13 * (abs(lams[2]) + 1.0) and d1 * d2 > 0:
            order = math.log2(d1 / d2)
            extrap = lams[2] - d2 / (2.0 ** order - 1.0)
            summary["order"] = order
            summary["extrapolated"] = extrap
            for r in rows:
                if r["status"] == "ok":
                    r["lhs"] = extrap
                    r["margin"] = r["rhs"] - extrap
        else:
            summary["order"] = None
            summary["extrapolated"] = lams[-1]
    elif len(ok_rows) >= 2:
        x = np.asarray([r["param"] for r in ok_rows])
        y = np.asarray([r["rhs"] for r in ok_rows])
        slope, intercept = np.polyfit(x, y, 1)
        summary["slope"] = float(slope)
        summary["intercept"] = float(intercept)

    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            repr(float(r["param"])), repr(float(r["lambda2"])),
            repr(float(r["norm_ratio"])), repr(float(r["lhs"])),
            repr(float(r["rhs"])), repr(float(r["margin"])),
            str(bool(r["satisfied"])).lower(), r["status"]]))
    _write_text("\n".join(lines) + "\n", args.out)
    summary_out = args.summary_out
    if summary_out is None and args.out:
        summary_out = args.out + ".summary.json"
    _write_json(summary, summary_out)
    if any(r["status"] != "ok" for r in rows):
        return EXIT_SOLVER
    return EXIT_OK


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectra",
        description="Weighted-Laplacian spectra and eigenvalue bound checks")
    parser.add_argument("--config", help="JSON file with default options")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    def add_common(p):
        p.add_argument("--geometry", default="flat_ball",
                       choices=["flat_ball", "round_sphere", "spheroid"])
        p.add_argument("--R", type=float, default=1.0)
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--spheroid-a", dest="spheroid_a", type=float,
                       default=1.0, help="spheroid axis parameter")
        p.add_argument("--density", default="constant")
        p.add_argument("--j", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--grid", type=int, default=4000)
        p.add_argument("--out", default=None)

    ps = sub.add_parser("spectrum", help="solve and emit a spectrum")
    subparsers.append(ps)
    add_common(ps)
    ps.add_argument("--k", type=int, default=10, help="eigenvalues per mode")
    ps.add_argument("--l-max", dest="l_max", type=int, default=8)
    ps.set_defaults(func=cmd_spectrum)

    pb = sub.add_parser("bounds", help="run a bound check")
    subparsers.append(pb)
    pb.add_argument("bound", choices=list(BOUND_NAMES))
    add_common(pb)
    pb.add_argument("--shape", default="ball", choices=["ball", "rectangle"])
    pb.add_argument("--a", dest="a_side", type=float, default=2.0,
                    help="rectangle side a")
    pb.add_argument("--b", dest="b_side", type=float, default=2.0,
                    help="rectangle side b")
    pb.add_argument("--nx", type=int, default=256)
    pb.add_argument("--ny", type=int, default=256)
    pb.add_argument("--j-sweep", dest="j_sweep", default="10,20,40,80")
    pb.add_argument("--eps-sweep", dest="eps_sweep", default="0.1,0.05,0.02")
    pb.add_argument("--f0", default="cos(2*t)")
    pb.add_argument("--potential", default="3*cos(t)")
    pb.add_argument("--k", type=int, default=5)
    pb.add_argument("--k-max", dest="k_max", type=int, default=200)
    pb.add_argument("--count", type=int, default=100)
    pb.add_argument("--seed", type=int, default=12345)
    pb.add_argument("--nu", default="sigma", choices=["sigma", "volume"])
    pb.add_argument("--optimize", action="store_true")
    pb.set_defaults(func=cmd_bounds)

    pw = sub.add_parser("sweep", help="sweep a parameter, emit CSV")
    subparsers.append(pw)
    add_common(pw)
    pw.add_argument("--var", required=True, choices=["j", "eps", "grid"])
    pw.add_argument("--values", default=None)
    pw.add_argument("--range", default=None, help="start:stop:factor")
    pw.add_argument("--f0", default="cos(2*t)")
    pw.add_argument("--tol-disc", dest="tol_disc", type=float, default=1e-3)
    pw.add_argument("--summary-out", dest="summary_out", default=None)
    pw.set_defaults(func=cmd_sweep)

    if defaults:
        # config-file values override argument defaults on every subcommand;
        # explicit flags still win
        for sp in subparsers:
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    loaded = None
    # config file provides defaults; explicit flags win
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            with open(argv[idx + 1]) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError, IndexError) as exc:
            sys.stderr.write(f"config error: {exc}\n")
            return EXIT_CONFIG
    parser = build_parser(loaded)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except RuntimeError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
