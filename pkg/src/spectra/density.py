"""Radial density families sigma = exp(-f), norms and Schrodinger potential."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import ProfileKind, RevolutionProfile, unit_sphere_area

#: weights never underflow to zero; in-spec densities stay far above this
EXP_CLAMP = -700.0


def clamped_exp(x):
    return np.exp(np.maximum(x, EXP_CLAMP))


@dataclass(frozen=True, eq=False)
class RadialDensity:
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    f_double_prime: Callable[[np.ndarray], np.ndarray]
    family: str
    params: dict = field(default_factory=dict)
    # radii where f'' jumps (the C^1 smoothed family); quadrature-based
    # assembly never differentiates sigma so C^1 is enough
    f_double_prime_breaks: tuple = ()

    def sigma(self, r):
        return clamped_exp(-np.asarray(self.f(r), dtype=float))


@dataclass(frozen=True)
class NormSummary:
    p: float
    value: float
    ratio_to_l1: float


def smoothing_alpha(n: int, R: float) -> int:
    """Smallest integer alpha >= 1 with (n-1) alpha^2/16 - 2 alpha R >= 2."""
    alpha = 1
    while (n - 1) * alpha * alpha / 16.0 - 2.0 * alpha * R < 2.0:
        alpha += 1
        if alpha > 10 ** 7:
            raise RuntimeError("no admissible smoothing exponent found")
    return alpha


def make_density(family: str, params: dict, profile: RevolutionProfile) -> RadialDensity:
    """Build a density family on the given profile.

    Families: "constant" (value), "gaussian" (j), "smoothed_gaussian"
    (j, alpha; closed profiles only), "semiclassical" (f0, f0_prime,
    f0_double_prime, eps), "custom" (f, f_prime, f_double_prime).
    """
    params = dict(params)
    if family == "constant":
        c = float(params.get("value", 1.0))
        if c <= 0:
            raise ValueError("constant density must be positive")
        fval = -math.log(c)
        return RadialDensity(
            f=lambda r: np.full_like(np.asarray(r, dtype=float), fval),
            f_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            f_double_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            family="constant", params={"value": c})

    if family == "gaussian":
        j = float(params["j"])
        if j <= 0:
            raise ValueError("gaussian density requires j > 0")
        return RadialDensity(
            f=lambda r: j * np.asarray(r, dtype=float) ** 2,
            f_prime=lambda r: 2.0 * j * np.asarray(r, dtype=float),
            f_double_prime=lambda r: np.full_like(np.asarray(r, dtype=float), 2.0 * j),
            family="gaussian", params={"j": j})

    if family == "smoothed_gaussian":
        if profile.kind is not ProfileKind.CLOSED:
            raise ValueError("smoothed_gaussian is defined on closed profiles only")
        j = float(params["j"])
        if j <= 0:
            raise ValueError("smoothed_gaussian requires j > 0")
        n, R = profile.dim_n, profile.R
        alpha = params.get("alpha")
        alpha = smoothing_alpha(n, R) if alpha is None else float(alpha)
        if alpha < 1:
            raise ValueError("alpha must be >= 1")
        if (n - 1) * alpha * alpha / 16.0 - 2.0 * alpha * R < 2.0:
            raise ValueError(
                f"alpha={alpha:g} too small: (n-1)a^2/16 - 2aR must be >= 2")
        r_knee = R - 1.0 / (alpha * j)
        if r_knee <= 0:
            raise ValueError("alpha*j too small: smoothing radius leaves [0, R]")

        def h(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= r_knee, r, r - 0.5 * alpha * j * (r - r_knee) ** 2)

        def hp(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= r_knee, 1.0, 1.0 - alpha * j * (r - r_knee))

        def hpp(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= r_knee, 0.0, -alpha * j)

        return RadialDensity(
            f=lambda r: j * h(r) ** 2,
            f_prime=lambda r: 2.0 * j * h(r) * hp(r),
            f_double_prime=lambda r: 2.0 * j * (hp(r) ** 2 + h(r) * hpp(r)),
            family="smoothed_gaussian",
            params={"j": j, "alpha": alpha, "r_knee": r_knee},
            f_double_prime_breaks=(r_knee,))

    if family == "semiclassical":
        eps = float(params["eps"])
        if eps <= 0:
            raise ValueError("semiclassical requires eps > 0")
        f0 = params["f0"]
        f0p = params["f0_prime"]
        f0pp = params["f0_double_prime"]
        _check_morse(f0p, f0pp, profile.R)
        return RadialDensity(
            f=lambda r: np.asarray(f0(r), dtype=float) / eps,
            f_prime=lambda r: np.asarray(f0p(r), dtype=float) / eps,
            f_double_prime=lambda r: np.asarray(f0pp(r), dtype=float) / eps,
            family="semiclassical", params={"eps": eps})

    if family == "custom":
        return RadialDensity(
            f=params["f"], f_prime=params["f_prime"],
            f_double_prime=params["f_double_prime"],
            family="custom", params={})

    raise ValueError(f"unknown density family {family!r}")


def _check_morse(f0p, f0pp, R, samples=4096):
    """Reject base functions whose sampled critical points degenerate."""
    r = np.linspace(0.0, R, samples)
    g = np.asarray(f0p(r), dtype=float)
    scale = float(np.max(np.abs(g)))
    if scale == 0.0:
        raise ValueError("base function is constant, not Morse")
    flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    curv = np.asarray(f0pp(r), dtype=float)
    cscale = float(np.max(np.abs(curv)))
    for i in flips:
        if abs(curv[i]) < 1e-6 * max(cscale, 1.0):
            raise ValueError(f"degenerate critical point near r={r[i]:.4g}")


def lp_norm(d: RadialDensity, profile: RevolutionProfile, n: int,
            exponent, grid) -> NormSummary:
    """L^p norm of sigma against the Riemannian volume (midpoint rule)."""
    r = grid.nodes
    th = np.asarray(profile.theta(r)) ** (n - 1)
    f = np.asarray(d.f(r), dtype=float)
    area = unit_sphere_area(n - 1)
    l1 = area * float(np.sum(th * clamped_exp(-f)) * grid.h)
    if exponent == math.inf:
        value = float(np.max(clamped_exp(-f)))
    else:
        p = float(exponent)
        if p < 1.0:
            raise ValueError("exponent must be >= 1 or inf")
        value = (area * float(np.sum(th * clamped_exp(-p * f)) * grid.h)) ** (1.0 / p)
    return NormSummary(p=float(exponent), value=value, ratio_to_l1=value / l1)


def norm_ratio(d: RadialDensity, profile: RevolutionProfile, n: int, grid) -> float:
    """||sigma||_{n/(n-2)} / ||sigma||_1, with the sup norm when n = 2."""
    if n < 2:
        raise ValueError("n must be >= 2")
    exponent = math.inf if n == 2 else n / (n - 2)
    return lp_norm(d, profile, n, exponent, grid).ratio_to_l1


def schrodinger_potential(d: RadialDensity, profile: RevolutionProfile,
                          n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Potential of the conjugated operator: f'^2/4 - (f'' + (n-1)(theta'/theta) f')/2.

    The sign convention matches a geometric (positive-spectrum) Laplacian.
    Near the pole (theta'/theta) f' tends to f''(0); a series limit is used
    for r below 1e-6.
    """
    fpp0 = float(d.f_double_prime(1e-8))

    def V(r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        fp = np.asarray(d.f_prime(r), dtype=float)
        fpp = np.asarray(d.f_double_prime(r), dtype=float)
        drift = np.empty_like(r)
        tiny = r < 1e-6
        safe = ~tiny
        rs = r[safe]
        drift[safe] = np.asarray(profile.theta_prime(rs), dtype=float) / \
            np.asarray(profile.theta(rs), dtype=float) * fp[safe]
        drift[tiny] = fpp0
        out = 0.25 * fp ** 2 + 0.5 * (-fpp - (n - 1) * drift)
        return out[0] if scalar else out

    return V


def density_to_dict(d: RadialDensity) -> dict:
    return {"family": d.family, "params": {k: v for k, v in d.params.items()
                                           if isinstance(v, (int, float, str))}}
