"""Shared spectral kernels: quadratic forms, min-max bounds, conjugation check.

The two-measure Rayleigh quotient R(u) = (sigma-weighted energy of u) /
(nu-mass of u) drives everything here.  Forms are kept at true scale
(including the angular area factor for radial geometries) so that their
values are actual integrals, not solver-normalized ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh as dense_eigh

from .cartesian import SparseSystem, make_circle, assemble_cartesian, \
    solve_sparse_pencil, schrodinger_system
from .density import RadialDensity, clamped_exp, make_density, schrodinger_potential
from .geometry import RevolutionProfile, unit_sphere_area
from .kernels import tridiag_eigh_smallest
from .radial import RadialGrid, assemble_radial, full_spectrum

MAX_SUBSPACE_DIM = 64


@dataclass(frozen=True, eq=False)
class QuadraticFormPair:
    """Discrete energy and mass forms; mass is diagonal in all geometries here."""
    energy: sparse.spmatrix
    mass_diag: np.ndarray

    def energy_value(self, u: np.ndarray) -> float:
        return float(u @ (self.energy @ u))

    def mass_value(self, u: np.ndarray) -> float:
        return float(u @ (self.mass_diag * u))


def radial_forms(profile: RevolutionProfile, density: RadialDensity, n: int,
                 l: int, grid: RadialGrid,
                 nu_weights: np.ndarray | None = None) -> QuadraticFormPair:
    """True-scale forms for angular degree l (area factor included)."""
    system = assemble_radial(profile, density, n, l, grid,
                             nu_weights=nu_weights, apply_shift=False)
    area = unit_sphere_area(n - 1)
    m = grid.m
    S = sparse.diags(
        [area * system.offdiag, area * system.diag, area * system.offdiag],
        offsets=[-1, 0, 1], format="csr")
    return QuadraticFormPair(energy=S, mass_diag=area * system.mass)


def cartesian_forms(system: SparseSystem) -> QuadraticFormPair:
    return QuadraticFormPair(energy=system.stiffness, mass_diag=system.mass)


def rayleigh_quotient(u: np.ndarray, forms: QuadraticFormPair) -> float:
    den = forms.mass_value(u)
    if den < 1e-300:
        raise ZeroDivisionError("mass form vanishes on the given vector")
    return forms.energy_value(u) / den


def variational_mu_k(forms: QuadraticFormPair, subspace: np.ndarray) -> float:
    """Largest Rayleigh quotient over the span of the given k vectors.

    By min-max this is an upper bound for the k-th two-measure eigenvalue.
    """
    U = np.atleast_2d(np.asarray(subspace, dtype=float))
    if U.shape[0] < U.shape[1]:
        U = U.T
    k = U.shape[1]
    if k > MAX_SUBSPACE_DIM:
        raise ValueError(f"subspace dimension capped at {MAX_SUBSPACE_DIM}")
    A = U.T @ (forms.energy @ U)
    B = U.T @ (forms.mass_diag[:, None] * U)
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    bvals = np.linalg.eigvalsh(B)
    if bvals[0] <= 1e-12 * max(bvals[-1], 1e-300):
        raise ValueError("subspace is rank deficient in the mass inner product")
    vals = dense_eigh(A, B, eigvals_only=True)
    return float(vals[-1])


def _merged_spectrum(profile, density, n, k, grid, l_max=None,
                     nu_weights=None):
    """First k eigenvalues, multiplicities expanded, without eigenvectors.

    The tail of the merged list may be mode-truncated; the first k values
    are certified complete against the omitted-mode floor.
    """
    import warnings as _warnings

    if l_max is None:
        l_max = max(8, k)
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        spec = full_spectrum(profile, density, n, l_max, min(k + 2, grid.m),
                             grid, nu_weights=nu_weights)
    vals = spec.expanded()
    if vals.shape[0] < k:
        raise ValueError("k_per_mode/l_max too small for the requested count")
    if nu_weights is None:
        from .radial import angular_eigenvalue
        theta_max = float(np.max(np.abs(profile.theta(grid.nodes))))
        floor = angular_eigenvalue(l_max + 1, n) / theta_max ** 2
        if vals[k - 1] > floor:
            raise ValueError(
                "l_max=%d provably too small: lambda_%d=%.6g exceeds the "
                "omitted-mode floor %.6g" % (l_max, k, vals[k - 1], floor))
    return vals[:k]


def schrodinger_equivalence_check(profile: RevolutionProfile,
                                  density: RadialDensity, n: int, k: int,
                                  grid: RadialGrid):
    """Spectral deviation between the weighted operator and its conjugate.

    Multiplication by sqrt(sigma) turns the weighted Laplacian into
    Delta + |f'|^2/4 + (Delta f)/2 acting against the flat measure.  On
    closed profiles both discretizations are solved and the max relative
    deviation over the first k eigenvalues is returned.  On profiles with
    boundary the conjugation bends the Neumann condition into a Robin one
    unless f'(R) = 0; in that case the comparison falls back to Rayleigh
    quotients of interior-supported test vectors.
    """
    boundary_mismatch = (not profile.closed and
                         abs(float(density.f_prime(profile.R))) > 1e-10)
    if boundary_mismatch:
        return _interior_rayleigh_comparison(profile, density, n, k, grid)

    weighted = _merged_spectrum(profile, density, n, k, grid)

    V = schrodinger_potential(density, profile, n)
    v_nodes = np.asarray(V(grid.nodes), dtype=float)
    flat = make_density("constant", {}, profile)
    out = []
    l_max = max(8, k)
    for l in range(l_max + 1):
        base = assemble_radial(profile, flat, n, l, grid)
        diag = base.diag + v_nodes * base.mass
        sfac = 1.0 / np.sqrt(base.mass)
        d = diag * sfac * sfac
        e = base.offdiag * sfac[:-1] * sfac[1:]
        vals, _ = tridiag_eigh_smallest(d, e, min(k + 2, grid.m))
        from .radial import angular_multiplicity
        for v in vals:
            out.extend([float(v)] * angular_multiplicity(l, n))
    conjugated = np.sort(np.asarray(out))[:k]
    dev = np.abs(weighted - conjugated) / (1.0 + np.abs(weighted))
    return float(np.max(dev))


def _interior_rayleigh_comparison(profile, density, n, k, grid):
    # conjugation-invariant check away from the boundary: R_L(u) for the
    # weighted form vs R_H(sqrt(sigma) u) for the conjugated one
    forms_L = radial_forms(profile, density, n, 0, grid)
    flat = make_density("constant", {}, profile)
    base = assemble_radial(profile, flat, n, 0, grid)
    V = schrodinger_potential(density, profile, n)
    v_nodes = np.asarray(V(grid.nodes), dtype=float)
    area = unit_sphere_area(n - 1)
    H = sparse.diags(
        [area * base.offdiag, area * (base.diag + v_nodes * base.mass),
         area * base.offdiag], offsets=[-1, 0, 1], format="csr")
    forms_H = QuadraticFormPair(energy=H, mass_diag=area * base.mass)
    sqrt_sigma = np.sqrt(clamped_exp(-np.asarray(density.f(grid.nodes), dtype=float)))

    r = grid.nodes
    R = profile.R
    devs = []
    for i in range(1, k + 1):
        # interior bumps: sin^2 arches compactly supported in (0, 0.8 R)
        u = np.where(r < 0.8 * R, np.sin(math.pi * i * r / (0.8 * R)) ** 2, 0.0)
        q_L = rayleigh_quotient(u, forms_L)
        q_H = rayleigh_quotient(sqrt_sigma * u, forms_H)
        devs.append(abs(q_L - q_H) / (1.0 + abs(q_L)))
    return float(np.max(devs))


def circle_equivalence_check(f, f_prime, f_double_prime, m: int, k: int,
                             L: float = 2.0 * math.pi) -> float:
    """Same conjugation check on the circle (periodic, no boundary)."""
    dom_w = make_circle(L, density=lambda t: np.exp(-f(t)), m=m)
    sys_w = assemble_cartesian(dom_w)
    w_vals, _ = solve_sparse_pencil(sys_w.stiffness, sys_w.mass, k, tol=1e-9)

    V = lambda t: 0.25 * np.asarray(f_prime(t)) ** 2 - 0.5 * np.asarray(
        f_double_prime(t))
    sys_h = schrodinger_system(make_circle(L, m=m), V)
    h_vals, _ = solve_sparse_pencil(sys_h.stiffness, sys_h.mass, k, tol=1e-9)
    dev = np.abs(w_vals - h_vals) / (1.0 + np.abs(w_vals))
    return float(np.max(dev))
