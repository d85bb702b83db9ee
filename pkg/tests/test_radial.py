import warnings

import numpy as np
import pytest

from oracles import (ball3_neumann_lambda2, disk_neumann_lambda2,
                     disk_neumann_radial_overtone, ou_lambda2)
from spectra.density import make_density
from spectra.geometry import make_profile
from spectra.kernels import tridiag_eigh_smallest
from spectra.radial import (angular_multiplicity, assemble_radial,
                            full_spectrum, lambda2, make_radial_grid,
                            refine_convergence, solve_radial)


def test_grid_weights(disk, flat_density):
    grid = make_radial_grid(disk, flat_density, 2, 1000)
    assert np.all(grid.weights > 0)
    assert np.all((grid.nodes > 0) & (grid.nodes < disk.R))
    # weights sum to the shell integral of theta^{n-1} sigma
    assert abs(grid.weights.sum() - 0.5) < 1e-6  # integral of r dr on [0,1]


def test_angular_multiplicities():
    assert [angular_multiplicity(l, 2) for l in range(4)] == [1, 2, 2, 2]
    assert [angular_multiplicity(l, 3) for l in range(4)] == [1, 3, 5, 7]
    assert [angular_multiplicity(l, 4) for l in range(4)] == [1, 4, 9, 16]


def test_constant_nullvector(disk, flat_density):
    grid = make_radial_grid(disk, flat_density, 2, 500)
    system = assemble_radial(disk, flat_density, 2, 0, grid)
    ones = np.ones(grid.m)
    resid = system.diag * ones
    resid[:-1] += system.offdiag * ones[1:]
    resid[1:] += system.offdiag * ones[:-1]
    scale = np.abs(system.diag).max()
    assert np.abs(resid).max() <= 1e-10 * scale
    # the difference form of the energy is exactly zero on constants
    assert system.energy_value(ones) == 0.0
    assert np.array_equal(system.mass, grid.weights)


def test_rejects_bad_arguments(disk, flat_density):
    grid = make_radial_grid(disk, flat_density, 2, 100)
    with pytest.raises(ValueError):
        assemble_radial(disk, flat_density, 1, 0, grid)
    with pytest.raises(ValueError):
        assemble_radial(disk, flat_density, 2, -1, grid)


def test_scale_invariance(disk):
    # multiplying sigma by a constant leaves the spectrum unchanged
    j = 3.0
    d1 = make_density("gaussian", {"j": j}, disk)
    d2 = make_density("custom", {
        "f": lambda r: j * np.asarray(r) ** 2 + 5.0,
        "f_prime": d1.f_prime, "f_double_prime": d1.f_double_prime}, disk)
    grid = make_radial_grid(disk, d1, 2, 1000)
    for l in (0, 1):
        s1 = assemble_radial(disk, d1, 2, l, grid)
        s2 = assemble_radial(disk, d2, 2, l, grid)
        v1, _ = solve_radial(s1, 3)
        v2, _ = solve_radial(s2, 3)
        assert np.abs(v1 - v2).max() < 1e-12 * (1.0 + np.abs(v1).max())


def test_hand_2x2_system():
    vals, vecs = tridiag_eigh_smallest(np.array([1.0, 1.0]),
                                       np.array([-1.0]), 2)
    assert np.allclose(vals, [0.0, 2.0], atol=1e-14)


def test_disk_radial_overtone_matches_bessel(disk, flat_density):
    grid = make_radial_grid(disk, flat_density, 2, 4000)
    system = assemble_radial(disk, flat_density, 2, 0, grid)
    vals, vecs = solve_radial(system, 2)
    oracle = disk_neumann_radial_overtone()
    assert abs(vals[0]) < 1e-9 * abs(system.diag).max()
    assert abs(vals[1] - oracle) / oracle < 1e-4
    # mass-orthonormality and Rayleigh consistency
    M = system.mass
    gram = vecs.T @ (M[:, None] * vecs)
    assert np.abs(gram - np.eye(2)).max() < 1e-8
    for i in range(2):
        rq = system.rayleigh(vecs[:, i])
        assert abs(rq - vals[i]) < 1e-9 * (1.0 + abs(vals[i]))


def test_sphere_l1_eigenvalue(sphere2):
    flat = make_density("constant", {}, sphere2)
    grid = make_radial_grid(sphere2, flat, 2, 4000)
    system = assemble_radial(sphere2, flat, 2, 1, grid)
    vals, _ = solve_radial(system, 1)
    assert abs(vals[0] - 2.0) < 1e-5


def test_ou_lambda2_on_large_disk():
    p = make_profile("flat_ball", R=3.0, n=2)
    d = make_density("gaussian", {"j": 4.0}, p)
    grid = make_radial_grid(p, d, 2, 4000)
    lam, branch = lambda2(p, d, 2, grid)
    assert branch == "l1"
    assert abs(lam - ou_lambda2(4.0)) / ou_lambda2(4.0) < 0.01


def test_backends_agree_on_assembled_system(sphere2):
    # the assembled pencils have large scale ratios; both engines must
    # agree there, not only on generic random matrices
    from spectra.kernels import numba_available
    if not numba_available():
        pytest.skip("numba not installed")
    d = make_density("gaussian", {"j": 8.0}, sphere2)
    grid = make_radial_grid(sphere2, d, 2, 2000)
    system = assemble_radial(sphere2, d, 2, 1, grid)
    v1, V1 = solve_radial(system, 5, backend="numpy")
    v2, V2 = solve_radial(system, 5, backend="numba")
    assert np.abs(v1 - v2).max() < 1e-9 * (1.0 + np.abs(v1).max())
    M = system.mass
    overlaps = np.abs(np.sum(V1 * (M[:, None] * V2), axis=0))
    assert np.abs(overlaps - 1.0).max() < 1e-6


def test_full_spectrum_sphere(sphere2):
    flat = make_density("constant", {}, sphere2)
    grid = make_radial_grid(sphere2, flat, 2, 2000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = full_spectrum(sphere2, flat, 2, 5, 5, grid)
    vals = spec.expanded()
    targets = [(0.0, 1), (2.0, 3), (6.0, 5), (12.0, 7)]
    idx = 0
    for lam, mult in targets:
        got = vals[idx:idx + mult]
        assert np.allclose(got, lam, atol=2e-4 * (1 + lam))
        idx += mult


def test_full_spectrum_ball3_lambda2():
    p = make_profile("flat_ball", R=1.0, n=3)
    flat = make_density("constant", {}, p)
    grid = make_radial_grid(p, flat, 3, 4000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = full_spectrum(p, flat, 3, 4, 4, grid)
    oracle = ball3_neumann_lambda2()
    nonzero = [e for e in spec.entries if e.lam > 1e-6]
    first = nonzero[0]
    assert first.l == 1 and first.multiplicity == 3
    assert abs(first.lam - oracle) / oracle < 1e-4


def test_mode_resolve_is_reproducible(sphere2):
    flat = make_density("constant", {}, sphere2)
    grid = make_radial_grid(sphere2, flat, 2, 1000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = full_spectrum(sphere2, flat, 2, 3, 4, grid)
    system = assemble_radial(sphere2, flat, 2, 2, grid)
    vals, _ = solve_radial(system, 4)
    from_spec = sorted(e.lam for e in spec.entries if e.l == 2)
    assert np.array_equal(np.asarray(from_spec), vals)


def test_truncation_warning(sphere2):
    flat = make_density("constant", {}, sphere2)
    grid = make_radial_grid(sphere2, flat, 2, 500)
    with pytest.warns(UserWarning, match="incomplete"):
        full_spectrum(sphere2, flat, 2, 1, 8, grid)


def test_lambda2_branches(disk, sphere2):
    flat_d = make_density("constant", {}, disk)
    grid = make_radial_grid(disk, flat_d, 2, 4000)
    lam, branch = lambda2(disk, flat_d, 2, grid)
    assert branch == "l1"
    assert abs(lam - disk_neumann_lambda2()) / lam < 1e-4
    flat_s = make_density("constant", {}, sphere2)
    grid_s = make_radial_grid(sphere2, flat_s, 2, 2000)
    lam_s, branch_s = lambda2(sphere2, flat_s, 2, grid_s)
    # the lambda = 2 eigenspace holds both a radial function (the axial
    # coordinate) and the two l=1 coordinates, so either label is correct
    assert branch_s in ("l1", "radial") and abs(lam_s - 2.0) < 1e-4
    sys1 = assemble_radial(sphere2, flat_s, 2, 1, grid_s)
    v1, _ = solve_radial(sys1, 1)
    assert abs(v1[0] - 2.0) < 1e-4


def test_refine_convergence_order_and_extrapolation(disk, sphere2):
    flat_s = make_density("constant", {}, sphere2)
    rc = refine_convergence(sphere2, flat_s, 2, 1, [500, 1000, 2000])
    assert rc.order is not None and 1.8 <= rc.order <= 2.2
    assert abs(rc.extrapolated - 2.0) < 1e-8
    flat_d = make_density("constant", {}, disk)
    rc_d = refine_convergence(disk, flat_d, 2, 1, [500, 1000, 2000])
    assert abs(rc_d.extrapolated - disk_neumann_lambda2()) < 1e-7


def test_refine_convergence_reports_converged(disk, flat_density):
    # the Neumann ground state is 0 on every grid
    rc = refine_convergence(disk, flat_density, 2, 0, [250, 500, 1000],
                            radial_index=0)
    assert rc.converged and rc.order is None


def test_spectrum_serialization(sphere2):
    flat = make_density("constant", {}, sphere2)
    grid = make_radial_grid(sphere2, flat, 2, 500)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = full_spectrum(sphere2, flat, 2, 2, 3, grid)
    d = spec.to_dict()
    assert d["grid_m"] == 500
    assert {"lambda", "l", "radial_index", "multiplicity"} <= set(
        d["entries"][0].keys())
