"""Spectra of weighted Laplacians on revolution manifolds and flat domains,
with numerically verified eigenvalue bounds."""

from .bounds import (Annulus, BoundReport, annulus_test_function,
                     convex_lower_check, disjoint_annulus_family,
                     energy_bound_check, gap_bound_check, hersch_bound_check,
                     max_ball_volume_ratio, minmax_upper_bound,
                     mobius_center_radial, optimize_annulus_family,
                     revolution_lower_check, sandwich_check,
                     semiclassical_check, weyl_check)
from .cartesian import (PlanarDomain, SparseSystem, assemble_cartesian,
                        cartesian_spectrum, ground_state_density, make_circle,
                        make_interval, make_rectangle, schrodinger_system,
                        solve_cartesian)
from .core import (QuadraticFormPair, cartesian_forms,
                   circle_equivalence_check, radial_forms, rayleigh_quotient,
                   schrodinger_equivalence_check, variational_mu_k)
from .density import (NormSummary, RadialDensity, lp_norm, make_density,
                      norm_ratio, schrodinger_potential)
from .geometry import (CurvatureSummary, ProfileKind, RevolutionProfile,
                       curvature_summary, make_profile, riemannian_volume,
                       unit_ball_volume, unit_sphere_area, validate_profile)
from .kernels import BACKEND, numba_available, tridiag_eigh_smallest
from .radial import (RadialGrid, RadialSystem, SpectrumEntry, SpectrumResult,
                     angular_eigenvalue, angular_multiplicity, assemble_radial,
                     full_spectrum, lambda2, make_radial_grid,
                     refine_convergence, solve_radial)

__version__ = "0.1.0"
