"""Inequality checks: test-function machinery, sharp sphere bound, lower
bounds for Gaussian-type densities, semiclassical blow-up, spectral-gap
transfer and the Weyl slope.

Every check emits a BoundReport carrying both sides of the inequality and
its margin.  Where an inequality is exact at the matrix level (min-max
directions), the quotients are evaluated with the same discrete
stiffness/mass pencil that produced the eigenvalues, so "satisfied" does
not hinge on quadrature error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .cartesian import (assemble_cartesian, ground_state_density, make_circle,
                        make_rectangle, schrodinger_system, solve_cartesian,
                        solve_sparse_pencil)
from .core import _merged_spectrum, radial_forms
from .density import (RadialDensity, clamped_exp, lp_norm, make_density,
                      norm_ratio)
from .geometry import (RevolutionProfile, curvature_summary, make_profile,
                       riemannian_volume, unit_ball_volume, unit_sphere_area)
from .radial import (angular_eigenvalue, assemble_radial, lambda2,
                     make_radial_grid)

REPORT_TOL_FACTOR = 1e-6


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "satisfied": self.satisfied, "margin": self.margin,
                "params": self.params}


def _report(name, lhs, rhs, params, tol_extra=0.0):
    tol = REPORT_TOL_FACTOR * (abs(lhs) + abs(rhs)) + tol_extra
    margin = rhs - lhs
    return BoundReport(name=name, lhs=float(lhs), rhs=float(rhs),
                       satisfied=bool(margin >= -tol), margin=float(margin),
                       params=params)


@dataclass(frozen=True)
class Annulus:
    """Distance band (r_inner, r_outer) around a pole; doubled copy is
    (r_inner/2, 2 r_outer).  Distances are measured in the profile metric,
    which is exact for pole centers."""
    center: str  # "N" or "S"
    r_inner: float
    r_outer: float

    def doubled(self):
        return self.r_inner / 2.0, 2.0 * self.r_outer


def _validate_annulus(a: Annulus, profile: RevolutionProfile):
    if a.center not in ("N", "S"):
        raise ValueError("annulus center must be 'N' or 'S'")
    if a.center == "S" and not profile.closed:
        raise ValueError("south-pole annuli need a closed profile")
    if not (0.0 <= a.r_inner < a.r_outer):
        raise ValueError("need 0 <= r_inner < r_outer")
    if 2.0 * a.r_outer > profile.R:
        raise ValueError("doubled annulus leaves the distance range [0, R]")


def _distance_from_center(a: Annulus, profile, r):
    return r if a.center == "N" else profile.R - r


def _r_interval(a: Annulus, profile, lo, hi):
    """Convert a (lo, hi) distance band to an interval on the r line."""
    if a.center == "N":
        return lo, hi
    return profile.R - hi, profile.R - lo


def annulus_test_function(a: Annulus, grid, profile: RevolutionProfile) -> np.ndarray:
    """Plateau test vector: 1 on the band, linear ramps across the doubling.

    The inner ramp rises on (r_inner/2, r_inner) and is absent when
    r_inner = 0; the outer ramp falls on (r_outer, 2 r_outer).
    """
    _validate_annulus(a, profile)
    d = _distance_from_center(a, profile, grid.nodes)
    r_in, r_out = a.r_inner, a.r_outer
    u = np.zeros_like(d)
    plateau = (d >= r_in) & (d <= r_out)
    u[plateau] = 1.0
    if r_in > 0.0:
        up = (d >= r_in / 2.0) & (d < r_in)
        u[up] = 2.0 * d[up] / r_in - 1.0
    down = (d > r_out) & (d < 2.0 * r_out)
    u[down] = 2.0 - d[down] / r_out
    return u


def max_ball_volume_ratio(profile: RevolutionProfile, n: int,
                          sample_count: int = 4096) -> float:
    """Sampled supremum of vol(ball)/radius^n over pole-centered balls.

    The small-radius limit (the Euclidean ball volume constant) is always
    included; on homogeneous geometries pole-centered balls already attain
    the supremum.  This is an estimate at the sampling resolution, not a
    certified bound.
    """
    R = profile.R
    h = R / sample_count
    mids = (np.arange(sample_count) + 0.5) * h
    shell = np.asarray(profile.theta(mids)) ** (n - 1) * h
    area = unit_sphere_area(n - 1)
    cum = area * np.cumsum(shell)
    radii = (np.arange(sample_count) + 1.0) * h
    best = float(np.max(cum / radii ** n))
    if profile.closed:
        cum_s = area * np.cumsum(shell[::-1])
        best = max(best, float(np.max(cum_s / radii ** n)))
    return max(best, unit_ball_volume(n))


def energy_bound_check(profile: RevolutionProfile, density: RadialDensity,
                       n: int, a: Annulus, grid) -> BoundReport:
    """Energy of the annulus test function against the volume-ratio bound.

    lhs: sigma-weighted Dirichlet energy of u_A.  rhs: 8 Gamma^{2/n} times
    the L^{n/(n-2)} mass of sigma on the doubled band to the power 1-2/n.
    Dimension 2 has no such exponent; the check is reported as skipped.
    """
    if n < 3:
        return BoundReport(name="energy", lhs=0.0, rhs=0.0, satisfied=True,
                           margin=0.0,
                           params={"skipped": "exponent n/(n-2) needs n >= 3",
                                   "n": n})
    _validate_annulus(a, profile)
    u = annulus_test_function(a, grid, profile)
    forms = radial_forms(profile, density, n, 0, grid)
    lhs = forms.energy_value(u)

    gamma = max_ball_volume_ratio(profile, n)
    lo, hi = _r_interval(a, profile, *a.doubled())
    mask = (grid.nodes > lo) & (grid.nodes < hi)
    p = n / (n - 2.0)
    th = np.asarray(profile.theta(grid.nodes)) ** (n - 1)
    sig_p = clamped_exp(-p * np.asarray(density.f(grid.nodes), dtype=float))
    mass_p = unit_sphere_area(n - 1) * float(
        np.sum(th[mask] * sig_p[mask]) * grid.h)
    rhs = 8.0 * gamma ** (2.0 / n) * mass_p ** (1.0 - 2.0 / n)
    return _report("energy", lhs, rhs, params={
        "n": n, "center": a.center, "r_inner": a.r_inner, "r_outer": a.r_outer,
        "volume_ratio_constant": gamma})


def random_annulus(profile: RevolutionProfile, rng) -> Annulus:
    """Seeded random pole-centered annulus with a valid doubled band."""
    center = "N"
    if profile.closed and rng.random() < 0.5:
        center = "S"
    r_out = float(rng.uniform(0.05, 0.5)) * profile.R
    r_in = 0.0 if rng.random() < 0.3 else float(rng.uniform(0.1, 0.66)) * r_out
    return Annulus(center=center, r_inner=r_in, r_outer=r_out)


def random_radial_density(profile: RevolutionProfile, rng,
                          min_oscillation: float = 0.1) -> RadialDensity:
    """Random cosine-series exponent; C^1 on closed profiles since every
    mode has vanishing derivative at both poles."""
    R = profile.R
    amps = rng.uniform(-0.5, 0.5, size=3)
    modes = np.arange(1, 4) * math.pi / R
    probe = np.linspace(0.0, R, 512)
    vals = sum(a * np.cos(w * probe) for a, w in zip(amps, modes))
    osc = float(np.max(vals) - np.min(vals))
    if osc < min_oscillation:
        amps = amps * (1.5 * min_oscillation / max(osc, 1e-12))

    def f(r):
        r = np.asarray(r, dtype=float)
        return sum(a * np.cos(w * r) for a, w in zip(amps, modes))

    def fp(r):
        r = np.asarray(r, dtype=float)
        return sum(-a * w * np.sin(w * r) for a, w in zip(amps, modes))

    def fpp(r):
        r = np.asarray(r, dtype=float)
        return sum(-a * w * w * np.cos(w * r) for a, w in zip(amps, modes))

    return make_density("custom",
                        {"f": f, "f_prime": fp, "f_double_prime": fpp},
                        profile)


def disjoint_annulus_family(profile: RevolutionProfile, k: int,
                            scale: float = 1.0 / 9.0) -> list[Annulus]:
    """k pole-centered annuli whose doubled bands are pairwise disjoint.

    Consecutive bands shrink geometrically (factor < 1/8 keeps the doubled
    copies apart); closed profiles split the family across both poles.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if scale >= 0.15:
        raise ValueError("scale must be < 0.15 for disjoint doubled bands")
    centers = ["N", "S"] if profile.closed else ["N"]
    # doubled bands reach 2*b0 from each pole; keep opposite stacks apart.
    # inner radius 0.6 b puts the doubled lower edge at 0.3 b, which leaves
    # a gap 0.3 b_i - 2 b_{i+1} > 0 between consecutive levels
    b0 = (0.45 if len(centers) == 1 else 0.22) * profile.R
    per = {c: 0 for c in centers}
    out = []
    for i in range(k):
        c = centers[i % len(centers)]
        level = per[c]
        per[c] += 1
        b = b0 * scale ** level
        out.append(Annulus(center=c, r_inner=0.6 * b, r_outer=b))
    return out


def _doubled_r_intervals(annuli, profile):
    return [_r_interval(a, profile, *a.doubled()) for a in annuli]


def check_disjoint(annuli, profile, margin=0.0):
    ivs = sorted(_doubled_r_intervals(annuli, profile))
    for (l1, h1), (l2, h2) in zip(ivs, ivs[1:]):
        if l2 < h1 + margin:
            return False
    return True


def _nu_node_weights(nu, profile, density, n, grid):
    if nu == "sigma":
        return None
    if nu == "volume":
        return np.asarray(profile.theta(grid.nodes)) ** (n - 1) * grid.h
    return np.asarray(nu, dtype=float)


def minmax_upper_bound(profile: RevolutionProfile, density: RadialDensity,
                       n: int, annuli, grid, nu="sigma") -> BoundReport:
    """Computed mu_k against the worst test-function quotient of the family.

    The doubled bands must be pairwise disjoint (with a two-cell margin, so
    the supports decouple in the discrete forms); then the span of the k
    test vectors bounds mu_k from above at the matrix level.
    """
    k = len(annuli)
    for a in annuli:
        _validate_annulus(a, profile)
    if not check_disjoint(annuli, profile, margin=2.0 * grid.h):
        raise ValueError("doubled annuli overlap (or come closer than two cells)")
    nu_w = _nu_node_weights(nu, profile, density, n, grid)
    lhs = float(_merged_spectrum(profile, density, n, k, grid,
                                 nu_weights=nu_w)[k - 1])
    # quotients through the same assembly that produced the eigenvalues
    system = assemble_radial(profile, density, n, 0, grid, nu_weights=nu_w)
    quotients = []
    for a in annuli:
        u = annulus_test_function(a, grid, profile)
        den = float(u @ (system.mass * u))
        if den <= 0.0:
            raise ValueError("annulus too thin for the grid: empty test function")
        quotients.append(system.energy_value(u) / den)
    rhs = max(quotients)
    return _report("minmax", lhs, rhs, params={
        "k": k, "nu": nu if isinstance(nu, str) else "custom",
        "quotients": [float(q) for q in quotients]})


def optimize_annulus_family(profile, density, n, annuli, grid, nu="sigma",
                            sweeps: int = 2, scan_points: int = 17):
    """Coordinate search over the 2k radii minimizing the family's worst
    quotient; the optimized family still bounds mu_k from above.

    Deterministic grid scan per coordinate; infeasible moves (doubled bands
    colliding) are skipped.
    """
    family = [Annulus(a.center, a.r_inner, a.r_outer) for a in annuli]
    # mu_k does not depend on the family; only quotients enter the search
    nu_w = _nu_node_weights(nu, profile, density, n, grid)
    system = assemble_radial(profile, density, n, 0, grid, nu_weights=nu_w)

    def worst(f):
        if not check_disjoint(f, profile, margin=2.0 * grid.h):
            return math.inf
        quotients = []
        for a in f:
            u = annulus_test_function(a, grid, profile)
            den = float(u @ (system.mass * u))
            if den <= 0.0:
                return math.inf
            quotients.append(system.energy_value(u) / den)
        return max(quotients)

    for _ in range(sweeps):
        for i in range(len(family)):
            for which in ("r_inner", "r_outer"):
                cur = family[i]
                lo = 1e-3 * profile.R if which == "r_inner" else cur.r_inner * 1.05
                hi = cur.r_outer * 0.95 if which == "r_inner" else profile.R / 2.0
                if hi <= lo:
                    continue

                def trial(x):
                    cand = list(family)
                    cand[i] = Annulus(cur.center,
                                      x if which == "r_inner" else cur.r_inner,
                                      cur.r_outer if which == "r_inner" else x)
                    if not (0.0 <= cand[i].r_inner < cand[i].r_outer):
                        return math.inf
                    return worst(cand)

                xs = np.linspace(lo, hi, scan_points)
                vals = [trial(x) for x in xs]
                best = int(np.argmin(vals))
                if vals[best] < worst(family):
                    family[i] = Annulus(cur.center,
                                        xs[best] if which == "r_inner" else cur.r_inner,
                                        cur.r_outer if which == "r_inner" else xs[best])
    return family, minmax_upper_bound(profile, density, n, family, grid, nu=nu)


def hersch_bound_check(density: RadialDensity, n: int, m: int = 4000) -> BoundReport:
    """Sharp upper bound for the first positive eigenvalue on the round
    sphere: lambda_2 <= n |S^n|^{2/n} ||sigma||_{n/(n-2)} / ||sigma||_1,
    equality exactly for constant densities (sup norm convention at n=2)."""
    profile = make_profile("round_sphere", n=n)
    grid = make_radial_grid(profile, density, n, m)
    lam2, branch = lambda2(profile, density, n, grid)
    exponent = math.inf if n == 2 else n / (n - 2.0)
    norms = lp_norm(density, profile, n, exponent, grid)
    rhs = n * unit_sphere_area(n) ** (2.0 / n) * norms.ratio_to_l1
    rep = _report("hersch", lam2, rhs, params={
        "n": n, "m": m, "branch": branch, "norm_ratio": norms.ratio_to_l1,
        "norms": {"p": "inf" if n == 2 else norms.p, "value": norms.value,
                  "ratio": norms.ratio_to_l1},
        "density": density.family})
    equality = abs(rep.margin) < 1e-4 * rhs
    rep.params["equality_case"] = bool(equality)
    return rep


def mobius_center_radial(density: RadialDensity, m: int = 4000):
    """Constructive conformal centering on the 2-sphere.

    Finds the axial dilation parameter t for which the density-average of
    the moved axial coordinate vanishes, then returns the Rayleigh
    quotients of the three centered coordinate functions, evaluated with
    the same discrete pencil as the eigensolver.  Their minimum is a
    certified upper bound for lambda_2.
    """
    n = 2
    profile = make_profile("round_sphere", n=n)
    grid = make_radial_grid(profile, density, n, m)
    w = grid.weights
    total = float(np.sum(w))
    z = np.cos(grid.nodes)

    def axial_mean(t):
        return float(np.sum((z + t) / (1.0 + t * z) * w))

    lo, hi = -1.0 + 1e-15, 1.0 - 1e-15
    flo = axial_mean(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (axial_mean(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    residual = axial_mean(t) / total
    if abs(residual) > 1e-10:
        raise RuntimeError(f"centering residual {residual:.2e} exceeds 1e-10")

    # moved coordinates: axial (z + t)/(1 + t z); transverse share the
    # radial part sqrt(1 - t^2) sin r / (1 + t cos r)
    axial = (z + t) / (1.0 + t * z)
    transverse = math.sqrt(1.0 - t * t) * np.sin(grid.nodes) / (1.0 + t * z)

    sys0 = assemble_radial(profile, density, n, 0, grid)
    sys1 = assemble_radial(profile, density, n, 1, grid)
    q_axial = sys0.rayleigh(axial)
    q_trans = sys1.rayleigh(transverse)
    return float(t), (q_trans, q_trans, q_axial)


def _lambda2_ball(n, R, j, m):
    profile = make_profile("flat_ball", R=R, n=n)
    density = make_density("gaussian", {"j": j}, profile)
    grid = make_radial_grid(profile, density, n, m)
    return lambda2(profile, density, n, grid)[0]


def _lambda2_rectangle(a, b, j, x0, nx, ny):
    x0 = (0.0, 0.0) if x0 is None else tuple(x0)
    dens = lambda x, y: np.exp(-j * ((x - x0[0]) ** 2 + (y - x0[1]) ** 2))
    dom = make_rectangle(a, b, density=dens, nx=nx, ny=ny)
    vals, _ = solve_cartesian(assemble_cartesian(dom), 2)
    return float(vals[1])


def convex_lower_check(shape: str, j: float, *, n: int = 2, R: float = 1.0,
                       a: float = 2.0, b: float = 2.0, x0=None,
                       m: int = 4000, nx: int = 256, ny: int = 256) -> BoundReport:
    """Gaussian density on a convex domain: lambda_2 >= 2j for every j > 0.

    The tolerance is tied to the discretization: ten times the change of
    lambda_2 under grid halving.
    """
    if j <= 0:
        raise ValueError("j must be positive")
    if shape == "ball":
        if x0 not in (None, 0, 0.0, (0.0, 0.0)):
            raise ValueError("the radial path supports only centered Gaussians")
        fine = _lambda2_ball(n, R, j, m)
        coarse = _lambda2_ball(n, R, j, m // 2)
        params = {"shape": "ball", "n": n, "R": R, "j": j, "m": m}
    elif shape == "rectangle":
        fine = _lambda2_rectangle(a, b, j, x0, nx, ny)
        coarse = _lambda2_rectangle(a, b, j, x0, nx // 2, ny // 2)
        params = {"shape": "rectangle", "a": a, "b": b, "j": j,
                  "nx": nx, "ny": ny,
                  "x0": list(x0) if x0 is not None else [0.0, 0.0]}
    else:
        raise ValueError("shape must be 'ball' or 'rectangle'")
    tol_disc = 10.0 * abs(fine - coarse)
    params["tol_disc"] = tol_disc
    params["lambda2"] = fine
    return _report("convex_lower", 2.0 * j, fine, params, tol_extra=tol_disc)


def sandwich_check(n: int, R: float, j_list, m: int = 4000):
    """Two-sided comparison of lambda_2 with the norm ratio on a flat ball.

    For each j the lower inequality ratio <= lambda_2 is reported; the
    summary carries the smallest sampled j from which it holds onward (the
    empirical threshold), the fitted upper constant max lambda_2/ratio and
    the linear-growth slope lambda_2/j at the largest j.  All constants are
    sampled estimates.
    """
    if n < 3:
        raise ValueError("the sandwich needs n >= 3")
    profile = make_profile("flat_ball", R=R, n=n)
    reports = []
    ratios, lams = [], []
    for j in j_list:
        density = make_density("gaussian", {"j": float(j)}, profile)
        grid = make_radial_grid(profile, density, n, m)
        lam = lambda2(profile, density, n, grid)[0]
        norms = lp_norm(density, profile, n, n / (n - 2.0), grid)
        ratio = norms.ratio_to_l1
        ratios.append(ratio)
        lams.append(lam)
        reports.append(_report(
            "sandwich_lower", ratio, lam,
            params={"j": float(j), "n": n, "R": R, "m": m, "lambda2": lam,
                    "norm_ratio": ratio,
                    "norms": {"p": norms.p, "value": norms.value,
                              "ratio": ratio}}))
    holds = [rep.satisfied for rep in reports]
    threshold = None
    for i in range(len(holds)):
        if all(holds[i:]):
            threshold = float(j_list[i])
            break
    upper_hat = max(l / r for l, r in zip(lams, ratios))
    summary = {
        "threshold_j": threshold,
        "upper_constant_hat": float(upper_hat),
        "lambda2_over_j_last": float(lams[-1] / j_list[-1]),
        "j_list": [float(j) for j in j_list],
        "lambda2": [float(v) for v in lams],
        "norm_ratio": [float(v) for v in ratios],
    }
    return reports, summary


def revolution_lower_check(profile: RevolutionProfile, j_list, m: int = 4000,
                           alpha=None):
    """Gaussian-family lower bounds on revolution manifolds.

    With boundary: lambda_2 >= 2j + min(C1, C2) with the curvature
    constants from the profile (plain 2j when the Ricci lower bound is
    nonnegative).  Closed: the smoothed family is used and the summary
    fits the growth slope of lambda_2 against j past the empirical onset.
    """
    reports = []
    lams = []
    cs = curvature_summary(profile)
    if not profile.closed:
        shift = 0.0 if cs.ric0 >= 0.0 else min(cs.c1, cs.c2)
        for j in j_list:
            density = make_density("gaussian", {"j": float(j)}, profile)
            grid = make_radial_grid(profile, density, n=profile.dim_n, m=m)
            lam, branch = lambda2(profile, density, profile.dim_n, grid)
            coarse = lambda2(profile, density, profile.dim_n,
                             make_radial_grid(profile, density, profile.dim_n,
                                              m // 2))[0]
            tol_disc = 10.0 * abs(lam - coarse)
            lams.append(lam)
            reports.append(_report(
                "revolution_lower", 2.0 * float(j) + shift, lam,
                params={"j": float(j), "branch": branch, "c1": cs.c1,
                        "c2": cs.c2, "ric0": cs.ric0, "m": m,
                        "lambda2": lam, "tol_disc": tol_disc},
                tol_extra=tol_disc))
        summary = {"kind": "with_boundary", "constant_shift": shift,
                   "ric0": cs.ric0}
        return reports, summary

    for j in j_list:
        density = make_density("smoothed_gaussian",
                               {"j": float(j), "alpha": alpha}, profile)
        grid = make_radial_grid(profile, density, profile.dim_n, m)
        lam, branch = lambda2(profile, density, profile.dim_n, grid)
        lams.append(lam)
        reports.append(_report(
            "revolution_lower_closed", 2.0 * float(j), lam,
            params={"j": float(j), "branch": branch,
                    "alpha": density.params["alpha"], "m": m, "lambda2": lam}))
    # tail-calibrated constant and onset, then the growth slope past it.
    # the per-j constant lambda_2 - 2j drifts by O(1%) across the sweep,
    # so the onset test carries a proportional slack; the fit needs at
    # least two points to be meaningful
    js = np.asarray([float(j) for j in j_list])
    lams_arr = np.asarray(lams)
    c_hat = float(lams_arr[-1] - 2.0 * js[-1])
    onset_mask = lams_arr >= 2.0 * js + c_hat - 0.01 * lams_arr
    j0_hat = float(js[np.argmax(onset_mask)]) if np.any(onset_mask) else float(js[-1])
    sel = js >= j0_hat
    if int(np.sum(sel)) < 2:
        sel = np.ones_like(js, dtype=bool)
        j0_hat = float(js[0])
    slope, intercept = np.polyfit(js[sel], lams_arr[sel], 1)
    summary = {"kind": "closed", "constant_hat": c_hat, "j0_hat": j0_hat,
               "slope": float(slope), "intercept": float(intercept),
               "j_list": [float(j) for j in j_list],
               "lambda2": [float(v) for v in lams]}
    return reports, summary


def count_stable_points(f0_prime, L=2.0 * math.pi, samples: int = 8192) -> int:
    """Local minima of a periodic function, by sign changes of its derivative."""
    t = np.arange(samples) * (L / samples)
    g = np.asarray(f0_prime(t), dtype=float)
    scale = float(np.max(np.abs(g)))
    if scale == 0.0:
        raise ValueError("derivative vanishes identically: not a Morse function")
    s = np.sign(g)
    s[s == 0.0] = 1.0
    flips_up = int(np.sum((s < 0) & (np.roll(s, -1) > 0)))
    if flips_up == 0:
        raise ValueError("no stable critical points found")
    return flips_up


def semiclassical_check(f0, f0_prime, f0_double_prime, eps_list,
                        m: int = 4000):
    """Densities exp(-f0/eps) on the circle: all but the lowest m0
    eigenvalues blow up; specifically lambda_{m0+1} >= 1/sqrt(eps).

    The m0 low eigenvalues collapse exponentially; below the eigensolver
    floor they are reported as computed together with a certified
    uncertainty (the solve tolerance), which downstream monotonicity
    checks must allow for.
    """
    m0 = count_stable_points(f0_prime)
    # nondegeneracy probe at the sampled minima
    t = np.arange(8192) * (2.0 * math.pi / 8192)
    g = np.asarray(f0_prime(t), dtype=float)
    s = np.sign(g)
    s[s == 0.0] = 1.0
    idx = np.nonzero((s < 0) & (np.roll(s, -1) > 0))[0]
    curv = np.asarray(f0_double_prime(t), dtype=float)
    if np.any(np.abs(curv[idx]) < 1e-6 * max(float(np.max(np.abs(curv))), 1.0)):
        raise ValueError("degenerate stable critical point: not Morse")

    tol = 1e-8
    reports = []
    for eps in eps_list:
        eps = float(eps)
        f_vals = lambda tt, e=eps: np.asarray(f0(tt), dtype=float) / e
        nodes = np.arange(m) * (2.0 * math.pi / m)
        fr = f_vals(nodes)
        dyn_range = math.exp(min(float(fr.max() - fr.min()), 700.0))
        under_resolved = dyn_range > 1e12
        if under_resolved:
            warnings.warn(
                "density dynamic range %.2e exceeds 1e12 at eps=%g; mass "
                "matrix conditioning is marginal" % (dyn_range, eps),
                stacklevel=2)
        shiftv = float(fr.min())
        dom = make_circle(2.0 * math.pi,
                          density=lambda tt, e=eps, s0=shiftv: clamped_exp(
                              -(np.asarray(f0(tt), dtype=float) / e - s0)),
                          m=m)
        vals, _ = solve_cartesian(assemble_cartesian(dom), m0 + 2)
        lam_low = float(vals[m0 - 1])
        lam_next = float(vals[m0])
        rep = _report("semiclassical", 1.0 / math.sqrt(eps), lam_next,
                      params={"eps": eps, "m0": m0, "m": m,
                              "lambda_m0": lam_low,
                              "lambda_m0_plus_1": lam_next,
                              "eig_uncertainty": tol * max(1.0, lam_next),
                              "dynamic_range_warning": bool(under_resolved)})
        reports.append(rep)
    summary = {"m0": m0,
               "eps_list": [float(e) for e in eps_list],
               "lambda_next": [r.params["lambda_m0_plus_1"] for r in reports],
               "lambda_low": [r.params["lambda_m0"] for r in reports]}
    return reports, summary


def gap_bound_check(V, k: int, m: int = 4000) -> BoundReport:
    """Spectral gaps of a circle Schrodinger operator against the
    variational eigenvalues of its ground-state density.

    lambda_k(H) - lambda_1(H) <= mu_k(psi^2, psi^2 dv); on functions the
    ground-state transform makes this an identity, so near-equality is
    reported alongside the inequality.
    """
    if k > 20:
        raise ValueError("k capped at 20")
    dom = make_circle(2.0 * math.pi, m=m)
    H = schrodinger_system(dom, V)
    h_vals, _ = solve_sparse_pencil(H.stiffness, H.mass, k, tol=1e-9)
    psi = ground_state_density(H, tol=1e-9)
    wdom = make_circle(2.0 * math.pi, density=psi ** 2, m=m)
    wsys = assemble_cartesian(wdom)
    mu_vals, _ = solve_sparse_pencil(wsys.stiffness, wsys.mass, k, tol=1e-9)

    gaps = h_vals - h_vals[0]
    devs = [abs(gaps[i] - mu_vals[i]) / mu_vals[i]
            for i in range(1, k) if mu_vals[i] > 1e-8]
    rep = _report("gap", float(gaps[k - 1]), float(mu_vals[k - 1]),
                  params={"k": k, "m": m,
                          "gaps": [float(g) for g in gaps],
                          "mu": [float(v) for v in mu_vals],
                          "max_rel_deviation": float(max(devs)) if devs else 0.0})
    return rep


def _weyl_modal_values(profile, density, n, grid, lam_cap):
    """All eigenvalues below lam_cap, merged over angular modes."""
    from .radial import angular_multiplicity

    theta_max = float(np.max(np.abs(profile.theta(grid.nodes))))
    out = []
    l = 0
    while angular_eigenvalue(l, n) / theta_max ** 2 <= lam_cap:
        system = assemble_radial(profile, density, n, l, grid)
        s = 1.0 / np.sqrt(system.mass)
        d = system.diag * s * s
        e = system.offdiag * s[:-1] * s[1:]
        vals = eigvalsh_tridiagonal(
            d, e, select="v", select_range=(-1.0, lam_cap),
            check_finite=False)
        if vals.size:
            out.extend(list(vals) * angular_multiplicity(l, n))
        l += 1
    return np.sort(np.asarray(out))


def weyl_check(profile: RevolutionProfile, density: RadialDensity, n: int,
               k_max: int = 200, m: int = 4000) -> BoundReport:
    """Slope of lambda_k against k^{2/n} versus the Weyl constant.

    The constant 4 pi^2 (unit-ball volume)^{-2/n} V^{-2/n} does not see the
    density; the fit runs over k in [k_max/2, k_max] with an intercept to
    absorb lower-order terms, and must land within 10%.
    """
    if k_max < 50:
        raise ValueError("k_max must be >= 50")
    flat = make_density("constant", {}, profile)
    grid = make_radial_grid(profile, flat, n, m)
    vol = riemannian_volume(profile, grid)
    target = 4.0 * math.pi ** 2 * unit_ball_volume(n) ** (-2.0 / n) * vol ** (
        -2.0 / n)

    cap = target * (1.3 * k_max) ** (2.0 / n) + 10.0
    vals = _weyl_modal_values(profile, density, n, grid, cap)
    for _ in range(5):
        if vals.shape[0] >= k_max:
            break
        cap *= 1.6
        vals = _weyl_modal_values(profile, density, n, grid, cap)
    if vals.shape[0] < k_max:
        raise RuntimeError("could not collect enough eigenvalues for the fit")

    ks = np.arange(k_max // 2, k_max + 1)
    x = ks ** (2.0 / n)
    y = vals[ks - 1]
    slope, intercept = np.polyfit(x, y, 1)

    # coarse-grid sanity on the largest fitted eigenvalue
    grid_c = make_radial_grid(profile, flat, n, m // 2)
    vals_c = _weyl_modal_values(profile, density, n, grid_c, cap)
    disc = abs(vals_c[k_max - 1] - vals[k_max - 1]) / vals[k_max - 1] \
        if vals_c.shape[0] >= k_max else math.inf
    if disc > 0.01:
        warnings.warn("discretization error %.2f%% at k_max: grid too coarse"
                      % (100.0 * disc), stacklevel=2)

    rel_err = abs(slope - target) / target
    rep = BoundReport(
        name="weyl", lhs=float(slope), rhs=float(target),
        satisfied=bool(rel_err <= 0.10), margin=float(target - slope),
        params={"n": n, "k_max": k_max, "m": m, "volume": vol,
                "fitted_intercept": float(intercept),
                "relative_error": float(rel_err),
                "disc_check": float(disc),
                "density": density.family})
    return rep
