import json
import math

import numpy as np
import pytest

from spectra.density import make_density
from spectra.geometry import (ProfileKind, curvature_summary, make_profile,
                              profile_from_dict, profile_to_dict,
                              riemannian_volume, unit_ball_volume,
                              unit_sphere_area, validate_profile)
from spectra.radial import make_radial_grid


def grid_for(profile, m=4000):
    flat = make_density("constant", {}, profile)
    return make_radial_grid(profile, flat, profile.dim_n, m)


def test_flat_ball_basics(disk):
    assert disk.kind is ProfileKind.WITH_BOUNDARY
    assert float(disk.theta(0.5)) == 0.5
    assert validate_profile(disk, tol=1e-8) == []


def test_round_sphere_basics(sphere2):
    assert sphere2.kind is ProfileKind.CLOSED
    assert abs(float(sphere2.theta(math.pi / 2)) - 1.0) < 1e-14
    assert abs(float(sphere2.theta_prime(math.pi / 2))) < 1e-14
    assert validate_profile(sphere2, tol=1e-8) == []


def test_custom_sinh_profile():
    r = np.linspace(0.0, 1.0, 16001)
    p = make_profile("custom", R=1.0, n=3,
                     samples=np.column_stack([r, np.sinh(r)]))
    assert p.kind is ProfileKind.WITH_BOUNDARY
    assert abs(float(p.theta_prime(1.0)) - math.cosh(1.0)) < 1e-4
    assert validate_profile(p, tol=1e-6) == []


def test_spheroid_profile():
    p = make_profile("spheroid", n=2, a=1.5)
    assert p.kind is ProfileKind.CLOSED
    assert validate_profile(p, tol=1e-8) == []
    # a=1 degenerates to the unit sphere
    s1 = make_profile("spheroid", n=2, a=1.0)
    assert abs(s1.R - math.pi) < 1e-10


def test_validation_reports_violations():
    p = make_profile("flat_ball", R=1.0, n=2)
    broken = type(p)(theta=lambda r: 0.9 * np.asarray(r, dtype=float),
                     theta_prime=lambda r: np.full_like(np.asarray(r, dtype=float), 0.9),
                     theta_double_prime=p.theta_double_prime,
                     R=1.0, kind=p.kind, dim_n=2)
    issues = validate_profile(broken, tol=1e-8)
    assert any("theta_prime_at_0" in s and "1.0" in s for s in issues)


def test_make_profile_rejects_bad_input():
    with pytest.raises(ValueError):
        make_profile("flat_ball", R=-1.0, n=2)
    with pytest.raises(ValueError):
        make_profile("round_sphere", R=2.0, n=2)
    with pytest.raises(ValueError):
        make_profile("flat_ball", R=1.0, n=1)
    r = np.linspace(0.0, 1.0, 200)
    with pytest.raises(ValueError):
        # theta'(0) = 2 violates the pole condition
        make_profile("custom", R=1.0, n=2,
                     samples=np.column_stack([r, 2.0 * r]))


def test_curvature_sphere(sphere2, sphere3):
    for p, n in ((sphere2, 2), (sphere3, 3)):
        cs = curvature_summary(p, 2000)
        assert abs(cs.ric0 - (n - 1)) < 1e-6
        assert cs.c2 > 0.0
        assert cs.ric0 <= cs.ric_radial_min + 1e-15
        assert cs.ric0 <= cs.ric_tangential_min + 1e-15


def test_curvature_sphere_grid_refinement(sphere2):
    coarse = curvature_summary(sphere2, 1000).ric0
    fine = curvature_summary(sphere2, 10000).ric0
    assert abs(coarse - fine) < 1e-4


def test_curvature_flat(disk, ball3):
    cs = curvature_summary(disk, 2000)
    assert abs(cs.ric0) < 1e-12
    assert abs(cs.c2) < 1e-9
    assert abs(cs.c1 - 1.0) < 1e-9  # inf of (theta'/theta)^2 at r = R
    cs3 = curvature_summary(ball3, 2000)
    assert abs(cs3.c1 - 2.0) < 1e-9


def test_c2_nonnegative_with_nonnegative_ricci(disk, ball3, sphere2, sphere3):
    for p in (disk, ball3, sphere2, sphere3):
        cs = curvature_summary(p, 4000)
        if cs.ric0 >= -1e-12:
            assert cs.c2 >= -1e-9


def test_negatively_curved_profile_constants():
    r = np.linspace(0.0, 1.0, 16001)
    p = make_profile("custom", R=1.0, n=3,
                     samples=np.column_stack([r, np.sinh(r)]))
    cs = curvature_summary(p, 4000)
    assert cs.ric0 < 0.0
    assert cs.c2 < 0.0  # pole limit -(2/3)(n-1) theta'''(0) = -4/3
    assert abs(cs.c2 + 4.0 / 3.0) < 1e-3


def test_volumes(disk, sphere2):
    assert abs(riemannian_volume(sphere2, grid_for(sphere2)) - 4 * math.pi) < 1e-6
    assert abs(riemannian_volume(disk, grid_for(disk)) - math.pi) < 1e-6
    b = make_profile("flat_ball", R=2.0, n=3)
    assert abs(riemannian_volume(b, grid_for(b)) - (4.0 / 3.0) * math.pi * 8.0) < 1e-4


def test_volume_refinement_order(sphere2):
    vols = [riemannian_volume(sphere2, grid_for(sphere2, m))
            for m in (500, 1000, 2000)]
    exact = 4 * math.pi
    order = math.log2(abs(vols[0] - exact) / abs(vols[1] - exact))
    assert 1.8 <= order <= 2.2


def test_area_constants():
    assert abs(unit_sphere_area(1) - 2 * math.pi) < 1e-14
    assert abs(unit_sphere_area(2) - 4 * math.pi) < 1e-14
    assert abs(unit_sphere_area(3) - 2 * math.pi ** 2) < 1e-14
    assert abs(unit_ball_volume(2) - math.pi) < 1e-14
    assert abs(unit_ball_volume(3) - 4 * math.pi / 3) < 1e-14


def test_serialization_round_trip(disk):
    blob = json.dumps(profile_to_dict(disk))
    back = profile_from_dict(json.loads(blob))
    assert back.R == disk.R and back.dim_n == disk.dim_n
    r = np.linspace(0.0, 1.0, 801)
    p = make_profile("custom", R=1.0, n=3,
                     samples=np.column_stack([r, np.sinh(r)]))
    back = profile_from_dict(json.loads(json.dumps(profile_to_dict(p))))
    x = np.linspace(0.1, 0.9, 7)
    assert np.allclose(back.theta(x), p.theta(x), atol=1e-12)
