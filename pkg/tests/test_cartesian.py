import math

import numpy as np
import pytest

from oracles import ou_lambda2
from spectra.cartesian import (assemble_cartesian, cartesian_spectrum,
                               ground_state_density, make_circle,
                               make_interval, make_rectangle,
                               schrodinger_system, solve_cartesian,
                               solve_sparse_pencil)


def test_interval_neumann_spectrum():
    dom = make_interval(math.pi, m=2000)
    vals, _ = solve_cartesian(assemble_cartesian(dom), 5)
    assert np.allclose(vals, [0, 1, 4, 9, 16], atol=1e-4 * 16)


def test_circle_spectrum():
    dom = make_circle(2 * math.pi, m=2000)
    vals, _ = solve_cartesian(assemble_cartesian(dom), 5)
    assert np.allclose(vals, [0, 1, 1, 4, 4], atol=1e-4 * 4)


def test_rectangle_spectra():
    dom = make_rectangle(1.0, 2.0, nx=96, ny=96)
    vals, _ = solve_cartesian(assemble_cartesian(dom), 2)
    assert abs(vals[1] - (math.pi / 2.0) ** 2) < 1e-3 * 2.5
    square = make_rectangle(1.0, 1.0, nx=96, ny=96)
    vals, _ = solve_cartesian(assemble_cartesian(square), 4)
    pi2 = math.pi ** 2
    for got, want in zip(vals, [0.0, pi2, pi2, 2 * pi2]):
        assert abs(got - want) <= 1e-3 * (1.0 + want)


def test_nullvector_and_symmetry():
    dom = make_rectangle(2.0, 2.0, density=lambda x, y: 1.0 + x * x + y * y,
                         nx=32, ny=32)
    system = assemble_cartesian(dom)
    n = system.mass.shape[0]
    ones = np.ones(n)
    scale = np.abs(system.stiffness.diagonal()).max()
    assert np.abs(system.stiffness @ ones).max() <= 1e-13 * scale
    asym = (system.stiffness - system.stiffness.T)
    assert asym.nnz == 0 or np.abs(asym.data).max() == 0.0


def test_rejects_nonpositive_density():
    dom = make_interval(1.0, density=lambda x: x, m=64)  # vanishes at 0
    with pytest.raises(ValueError):
        assemble_cartesian(dom)


def test_refinement_order_smooth_density():
    vals = []
    for m in (250, 500, 1000):
        dom = make_interval(math.pi, density=lambda x: np.exp(np.sin(x)), m=m)
        v, _ = solve_cartesian(assemble_cartesian(dom), 2)
        vals.append(v[1])
    order = math.log2(abs(vals[0] - vals[1]) / abs(vals[1] - vals[2]))
    assert 1.8 <= order <= 2.2


def test_gaussian_rectangle_lambda2():
    j = 6.0
    dom = make_rectangle(2.0, 2.0,
                         density=lambda x, y: np.exp(-j * (x * x + y * y)),
                         nx=192, ny=192)
    vals, _ = solve_cartesian(assemble_cartesian(dom), 3)
    assert vals[1] >= ou_lambda2(j) - 0.05
    assert abs(vals[1] - ou_lambda2(j)) / ou_lambda2(j) < 0.02


def test_gaussian_center_translation_equivariance():
    # large box: moving the center well inside barely changes lambda_2
    j = 5.0
    lams = []
    for cx in (0.0, 0.35):
        dom = make_rectangle(6.0, 6.0, density=lambda x, y, c=cx: np.exp(
            -j * ((x - c) ** 2 + y ** 2)), nx=160, ny=160)
        v, _ = solve_cartesian(assemble_cartesian(dom), 2)
        lams.append(v[1])
    assert abs(lams[0] - lams[1]) / lams[0] < 1e-3


def test_ground_state_flat_potential_is_constant():
    dom = make_circle(2 * math.pi, m=512)
    system = schrodinger_system(dom, lambda t: np.zeros_like(t))
    psi = ground_state_density(system)
    assert psi.std() / psi.mean() < 1e-8


def test_ground_state_harmonic_oscillator():
    j = 2.0
    dom = make_interval(12.0, m=3000)
    system = schrodinger_system(dom, lambda x: j * j * x * x - j)
    psi = ground_state_density(system)
    x = system.coords
    exact = np.exp(-j * x ** 2 / 2.0)
    exact /= math.sqrt(float(exact @ (system.mass * exact)))
    bulk = np.abs(x) < 2.0
    rel = np.abs(psi[bulk] - exact[bulk]) / exact[bulk]
    assert rel.max() < 1e-4


def test_ground_state_positive_for_rough_potential():
    rng = np.random.default_rng(5)
    coef = rng.normal(size=4)
    V = lambda t: (coef[0] * np.cos(t) + coef[1] * np.sin(t) +
                   coef[2] * np.cos(2 * t) + coef[3] * np.sin(3 * t))
    dom = make_circle(2 * math.pi, m=1024)
    psi = ground_state_density(schrodinger_system(dom, V))
    assert psi.min() > 0.0


def test_nonconvergence_reports_iterations():
    dom = make_rectangle(1.0, 1.0, nx=48, ny=48)
    system = assemble_cartesian(dom)
    with pytest.raises(RuntimeError, match="iterations"):
        solve_sparse_pencil(system.stiffness, system.mass, 4, tol=1e-8,
                            max_iter=1)


def test_spectrum_result_wrapper():
    dom = make_interval(math.pi, m=256)
    spec = cartesian_spectrum(dom, 3)
    assert spec.entries[0].l is None
    assert spec.entries[0].multiplicity is None
    assert len(spec.expanded()) == 3
