"""Independent reference values for the tests.

Everything here is computed from scratch (power series, bisection,
closed-form integrals) so the solver under test never feeds its own
answers back in.
"""

import math


def bessel_j(order, x, terms=60):
    """Power series for the Bessel function of integer order."""
    total = 0.0
    half = x / 2.0
    for m in range(terms):
        term = (-1.0) ** m / (math.factorial(m) * math.factorial(m + order)) * \
            half ** (2 * m + order)
        total += term
    return total


def bessel_j_prime(order, x):
    if order == 0:
        return -bessel_j(1, x)
    return bessel_j(order - 1, x) - order / x * bessel_j(order, x)


def bisect(fn, lo, hi, iters=200):
    flo = fn(lo)
    if flo == 0.0:
        return lo
    if flo * fn(hi) > 0.0:
        raise ValueError("bisection bracket does not straddle a root")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) * flo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def disk_neumann_radial_overtone():
    """First positive zero of J0', squared: the first nonzero radial
    Neumann eigenvalue of the unit disk."""
    return bisect(lambda x: bessel_j_prime(0, x), 2.0, 5.0) ** 2


def disk_neumann_lambda2():
    """(first zero of J1')^2: the first nonzero Neumann eigenvalue of the
    unit disk."""
    return bisect(lambda x: bessel_j_prime(1, x), 1.0, 3.0) ** 2


def spherical_j1(x):
    return math.sin(x) / x ** 2 - math.cos(x) / x


def spherical_j1_prime(x):
    j0 = math.sin(x) / x
    return j0 - 2.0 / x * spherical_j1(x)


def ball3_neumann_lambda2():
    """First zero of the derivative of the order-1 spherical Bessel
    function, squared: lambda_2 of the Neumann unit ball in R^3."""
    return bisect(spherical_j1_prime, 1.0, 3.0) ** 2


def sphere_eigenvalue(level, n):
    """Laplacian eigenvalue of the round n-sphere."""
    return level * (level + n - 1)


def ou_lambda2(j):
    """Gaussian-weighted flat space: spectrum 2j * (nonnegative integers)."""
    return 2.0 * j
