"""Revolution-manifold profiles, validity checks, curvature and volume.

A profile describes the metric dr^2 + theta(r)^2 g_{S^{n-1}} on (0, R]
(with boundary) or (0, R) (closed, two poles).  The warp theta fixes the
geometry; everything downstream (quadrature weights, angular potentials,
curvature constants) is evaluated through the callables stored here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ProfileKind(enum.Enum):
    WITH_BOUNDARY = "with_boundary"
    CLOSED = "closed"


def unit_sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^dim in R^{dim+1}."""
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / math.gamma((dim + 1) / 2.0)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True, eq=False)
class RevolutionProfile:
    theta: Callable[[np.ndarray], np.ndarray]
    theta_prime: Callable[[np.ndarray], np.ndarray]
    theta_double_prime: Callable[[np.ndarray], np.ndarray]
    R: float
    kind: ProfileKind
    dim_n: int
    name: str = "custom"
    samples: Optional[tuple] = field(default=None, repr=False)

    @property
    def closed(self) -> bool:
        return self.kind is ProfileKind.CLOSED


@dataclass(frozen=True)
class CurvatureSummary:
    ric_radial_min: float
    ric_tangential_min: float
    ric0: float
    c1: float
    c2: float


def _golden_min(fn, a, b, tol=1e-12, maxit=200):
    """Golden-section minimum of a scalar function on [a, b]."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(maxit):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    return min(f1, f2)


def _spline_profile(samples, R, n, kind, name):
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 8:
        raise ValueError("custom profile needs (r, theta) samples, at least 8 rows")
    r, th = pts[:, 0], pts[:, 1]
    if r[0] != 0.0 or abs(r[-1] - R) > 1e-12 * max(R, 1.0):
        raise ValueError("samples must span [0, R] starting at r=0")
    spline = CubicSpline(r, th, bc_type="natural")
    d1 = spline.derivative(1)
    d2 = spline.derivative(2)
    return RevolutionProfile(
        theta=lambda x: spline(x),
        theta_prime=lambda x: d1(x),
        theta_double_prime=lambda x: d2(x),
        R=float(R),
        kind=kind,
        dim_n=n,
        name=name,
        samples=tuple(map(tuple, pts.tolist())),
    )


def _spheroid_samples(a: float, count: int = 8001):
    # generating ellipse (sin u, a cos u); warp = sin u as a function of arclength
    from scipy.integrate import cumulative_simpson

    u = np.linspace(0.0, math.pi, count)
    speed = np.sqrt(np.cos(u) ** 2 + (a * np.sin(u)) ** 2)
    s = cumulative_simpson(speed, x=u, initial=0.0)
    return np.column_stack([s, np.sin(u)])


def make_profile(kind: str, R: Optional[float] = None, n: int = 2, *,
                 a: Optional[float] = None,
                 samples: Optional[Sequence] = None) -> RevolutionProfile:
    """Construct a built-in or custom revolution profile.

    kind: "flat_ball", "round_sphere", "spheroid" (parameter a > 0) or
    "custom" (with (r, theta) samples).  All profiles are validated
    against the pole conditions theta(0)=0, theta'(0)=1, theta''(0)=0
    and, for closed profiles, the mirrored conditions at r=R.
    """
    if n < 2:
        raise ValueError("manifold dimension n must be >= 2")
    if kind == "flat_ball":
        if R is None or R <= 0:
            raise ValueError("flat_ball requires R > 0")
        R = float(R)
        p = RevolutionProfile(
            theta=lambda r: np.asarray(r, dtype=float) + 0.0,
            theta_prime=lambda r: np.ones_like(np.asarray(r, dtype=float)),
            theta_double_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            R=R, kind=ProfileKind.WITH_BOUNDARY, dim_n=n, name="flat_ball")
    elif kind == "round_sphere":
        if R is None:
            R = math.pi
        if abs(R - math.pi) > 1e-12:
            raise ValueError("round_sphere requires R = pi (unit sphere)")
        p = RevolutionProfile(
            theta=np.sin, theta_prime=np.cos,
            theta_double_prime=lambda r: -np.sin(r),
            R=math.pi, kind=ProfileKind.CLOSED, dim_n=n, name="round_sphere")
    elif kind == "spheroid":
        if a is None or a <= 0:
            raise ValueError("spheroid requires parameter a > 0")
        pts = _spheroid_samples(float(a))
        p = _spline_profile(pts, pts[-1, 0], n, ProfileKind.CLOSED,
                            f"spheroid(a={a:g})")
    elif kind == "custom":
        if samples is None:
            raise ValueError("custom profile requires samples")
        if R is None:
            R = float(np.asarray(samples)[-1, 0])
        pts = np.asarray(samples, dtype=float)
        closed = abs(pts[-1, 1]) <= 1e-8 * max(1.0, float(np.max(np.abs(pts[:, 1]))))
        p = _spline_profile(pts, R, n,
                            ProfileKind.CLOSED if closed else ProfileKind.WITH_BOUNDARY,
                            "custom")
    else:
        raise ValueError(f"unknown profile kind {kind!r}")

    issues = validate_profile(p, tol=1e-8)
    if issues:
        raise ValueError("invalid profile: " + "; ".join(issues))
    return p


def validate_profile(p: RevolutionProfile, tol: float = 1e-8) -> list[str]:
    """Diagnostics for the pole/boundary conditions; empty list means valid."""
    out = []
    checks = [
        ("theta_at_0", float(p.theta(0.0)), 0.0),
        ("theta_prime_at_0", float(p.theta_prime(0.0)), 1.0),
        ("theta_double_prime_at_0", float(p.theta_double_prime(0.0)), 0.0),
    ]
    if p.closed:
        checks += [
            ("theta_at_R", float(p.theta(p.R)), 0.0),
            ("theta_prime_at_R", float(p.theta_prime(p.R)), -1.0),
            ("theta_double_prime_at_R", float(p.theta_double_prime(p.R)), 0.0),
        ]
    for label, got, want in checks:
        resid = abs(got - want)
        if resid > tol:
            out.append(f"{label} residual {resid:.3e}")
    # interior positivity on a fixed sample
    r = np.linspace(0.0, p.R, 2001)[1:-1]
    th = np.asarray(p.theta(r))
    if np.any(th <= 0.0):
        bad = r[np.argmin(th)]
        out.append(f"theta_nonpositive_at r={bad:.6g}")
    if not p.closed and float(p.theta(p.R)) <= 0.0:
        out.append("theta_nonpositive_at_boundary")
    return out


def _third_derivative_at_pole(p: RevolutionProfile) -> float:
    # theta''(h)/h -> theta'''(0); Richardson in h^2 makes it 4th order
    h = 1e-3 * p.R
    t3 = lambda s: float(p.theta_double_prime(s)) / s
    return (4.0 * t3(h / 2.0) - t3(h)) / 3.0


def curvature_summary(p: RevolutionProfile, grid_points: int = 10000) -> CurvatureSummary:
    """Ricci lower bounds and the two eigenvalue-bound constants.

    Radial Ricci is -(n-1) theta''/theta; the tangential component uses
    the standard warped-product expression -theta''/theta +
    (n-2)(1-theta'^2)/theta^2.  The radial-spectrum constant takes the
    factor (n-1) on (theta'/theta)^2; a sharper variant with factor n
    exists but is not used here.  Infima are sampled minima refined by
    golden section, so they are estimates, not certified bounds.
    """
    if grid_points < 100:
        raise ValueError("grid_points must be >= 100")
    issues = validate_profile(p)
    if issues:
        raise ValueError("invalid profile: " + "; ".join(issues))
    n = p.dim_n
    R = p.R
    r = (np.arange(grid_points) + 0.5) * (R / grid_points)
    if not p.closed:
        # infima over (0, R) can be approached at the boundary
        r = np.append(r, R)
    th = np.asarray(p.theta(r))
    th1 = np.asarray(p.theta_prime(r))
    th2 = np.asarray(p.theta_double_prime(r))

    ric_rad = -(n - 1) * th2 / th
    ric_tan = -th2 / th + (n - 2) * (1.0 - th1 ** 2) / th ** 2
    ric_radial_min = float(np.min(ric_rad))
    ric_tangential_min = float(np.min(ric_tan))
    ric0 = min(ric_radial_min, ric_tangential_min)

    def refine(values, fn):
        i = int(np.argmin(values))
        lo = r[max(i - 1, 0)]
        hi_ = r[min(i + 1, len(r) - 1)]
        return min(float(values[i]), _golden_min(fn, lo, hi_))

    log_slope_sq = (th1 / th) ** 2
    c1_fn = lambda s: float(p.theta_prime(s)) ** 2 / float(p.theta(s)) ** 2
    c1 = (n - 1) * refine(log_slope_sq, c1_fn) + ric0

    drift = (r - th1 * th) / (r * th ** 2)
    c2_fn = lambda s: (s - float(p.theta_prime(s)) * float(p.theta(s))) / (
        s * float(p.theta(s)) ** 2)
    pole_limit = -(2.0 / 3.0) * _third_derivative_at_pole(p)
    c2 = (n - 1) * min(refine(drift, c2_fn), pole_limit)

    return CurvatureSummary(
        ric_radial_min=ric_radial_min,
        ric_tangential_min=ric_tangential_min,
        ric0=ric0,
        c1=c1,
        c2=c2,
    )


def riemannian_volume(p: RevolutionProfile, grid) -> float:
    """|S^{n-1}| * integral of theta^{n-1} by the grid's midpoint rule."""
    th = np.asarray(p.theta(grid.nodes))
    return unit_sphere_area(p.dim_n - 1) * float(np.sum(th ** (p.dim_n - 1)) * grid.h)


def profile_to_dict(p: RevolutionProfile) -> dict:
    return {
        "kind": p.name,
        "R": p.R,
        "n": p.dim_n,
        "samples": [list(s) for s in p.samples] if p.samples is not None else None,
    }


def profile_from_dict(d: dict) -> RevolutionProfile:
    kind = d["kind"]
    if d.get("samples"):
        return make_profile("custom", R=d["R"], n=d["n"], samples=d["samples"])
    if kind in ("flat_ball", "round_sphere"):
        return make_profile(kind, R=d["R"], n=d["n"])
    raise ValueError(f"cannot rebuild profile of kind {kind!r} without samples")
