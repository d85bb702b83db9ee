"""Symmetric tridiagonal eigensolver engines.

Every radial eigenproblem reduces, after mass scaling, to the k smallest
eigenpairs of a real symmetric tridiagonal matrix.  Two interchangeable
engines are provided:

* ``numba``: Sturm-sequence bisection for the eigenvalues followed by
  shifted inverse iteration (partial-pivoted tridiagonal LU) for the
  eigenvectors, compiled with ``numba.njit``.
* ``numpy``: LAPACK bisection + inverse iteration through
  ``scipy.linalg.eigh_tridiagonal``.

The environment variable ``SPECTRA_BACKEND`` selects the engine
(``auto``, ``numba`` or ``numpy``; ``auto`` prefers numba when it is
importable).  Both engines post-process identically: eigenvalues are
refined to the Rayleigh quotient of their eigenvector, vectors are
re-orthonormalized and carry a fixed sign convention, and output is
sorted ascending, so the two paths agree to solver tolerance and results
are deterministic for a fixed backend.
"""

from __future__ import annotations

import os

import numpy as np

_EPS = float(np.finfo(np.float64).eps)
_SAFEMIN = float(np.finfo(np.float64).tiny)

_requested = os.environ.get("SPECTRA_BACKEND", "auto").strip().lower()
if _requested == "scipy":
    _requested = "numpy"
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        "SPECTRA_BACKEND must be one of auto|numba|numpy, got %r" % _requested
    )

_have_numba = False
if _requested in ("auto", "numba"):
    try:
        from numba import njit

        _have_numba = True
    except ImportError:
        if _requested == "numba":
            raise ImportError("SPECTRA_BACKEND=numba requires the numba package")

#: the engine actually in use for eigenpair solves
BACKEND = "numba" if _have_numba else "numpy"


def numba_available() -> bool:
    return _have_numba


if _have_numba:

    @njit(cache=True)
    def _sturm_count(d, e2, x, pivmin):
        # number of eigenvalues strictly below x (negative pivots of LDL^T)
        count = 0
        q = d[0] - x
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
        for i in range(1, d.shape[0]):
            q = d[i] - x - e2[i - 1] / q
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0.0:
                count += 1
        return count

    @njit(cache=True)
    def _bisect_smallest(d, e, k):
        n = d.shape[0]
        e2 = np.empty(max(n - 1, 1))
        e2max = 0.0
        for i in range(n - 1):
            e2[i] = e[i] * e[i]
            if e2[i] > e2max:
                e2max = e2[i]
        # pivmin sized so e2/pivmin cannot overflow (LAPACK dstebz convention)
        pivmin = 2.2250738585072014e-308 * max(1.0, e2max)

        glo = d[0]
        ghi = d[0]
        for i in range(n):
            r = 0.0
            if i > 0:
                r += abs(e[i - 1])
            if i < n - 1:
                r += abs(e[i])
            if d[i] - r < glo:
                glo = d[i] - r
            if d[i] + r > ghi:
                ghi = d[i] + r
        bnorm = max(abs(glo), abs(ghi))
        glo -= 2.0 * 2.220446049250313e-16 * bnorm + pivmin
        ghi += 2.0 * 2.220446049250313e-16 * bnorm + pivmin

        vals = np.empty(k)
        for j in range(k):
            a = glo
            b = ghi
            for _ in range(220):
                mid = 0.5 * (a + b)
                if mid <= a or mid >= b:
                    break
                if _sturm_count(d, e2, mid, pivmin) >= j + 1:
                    b = mid
                else:
                    a = mid
                if (b - a) <= 4.0 * 2.220446049250313e-16 * max(abs(a), abs(b)):
                    break
            vals[j] = 0.5 * (a + b)
        return vals

    @njit(cache=True)
    def _inverse_iterate(d, e, lam, seed, tnorm, extra_shift):
        n = d.shape[0]
        dl = np.empty(max(n - 1, 1))
        du = np.empty(max(n - 1, 1))
        du2 = np.zeros(max(n - 2, 1))
        dd = np.empty(n)
        piv = np.empty(max(n - 1, 1), np.int64)
        shift = lam + extra_shift
        tiny = 2.2250738585072014e-308 * (1.0 + tnorm)
        for i in range(n - 1):
            dl[i] = e[i]
            du[i] = e[i]
        for i in range(n):
            dd[i] = d[i] - shift
        # tridiagonal LU with partial pivoting (dgttrf layout)
        for i in range(n - 1):
            if abs(dd[i]) >= abs(dl[i]):
                piv[i] = 0
                if dd[i] == 0.0:
                    dd[i] = tiny
                f = dl[i] / dd[i]
                dl[i] = f
                dd[i + 1] -= f * du[i]
                if i < n - 2:
                    du2[i] = 0.0
            else:
                piv[i] = 1
                f = dd[i] / dl[i]
                dd[i] = dl[i]
                dl[i] = f
                t = du[i]
                du[i] = dd[i + 1]
                dd[i + 1] = t - f * dd[i + 1]
                if i < n - 2:
                    du2[i] = du[i + 1]
                    du[i + 1] = -f * du[i + 1]
        if dd[n - 1] == 0.0:
            dd[n - 1] = tiny

        v = np.empty(n)
        state = seed
        for i in range(n):
            state = state * np.uint64(6364136223846793005) + np.uint64(
                1442695040888963407
            )
            v[i] = (np.float64(state >> np.uint64(11)) / 9007199254740992.0) - 0.5

        ok = False
        for _ in range(8):
            # forward substitution with the recorded row swaps
            for i in range(n - 1):
                if piv[i] == 0:
                    v[i + 1] -= dl[i] * v[i]
                else:
                    t = v[i]
                    v[i] = v[i + 1]
                    v[i + 1] = t - dl[i] * v[i]
            # back substitution (second superdiagonal from pivoting)
            v[n - 1] /= dd[n - 1]
            if n > 1:
                v[n - 2] = (v[n - 2] - du[n - 2] * v[n - 1]) / dd[n - 2]
            for i in range(n - 3, -1, -1):
                v[i] = (v[i] - du[i] * v[i + 1] - du2[i] * v[i + 2]) / dd[i]

            nrm = 0.0
            for i in range(n):
                nrm += v[i] * v[i]
            nrm = np.sqrt(nrm)
            if not np.isfinite(nrm) or nrm == 0.0:
                return v, False
            inv = 1.0 / nrm
            for i in range(n):
                v[i] *= inv
            # residual against the target eigenvalue
            res = 0.0
            for i in range(n):
                r = (d[i] - lam) * v[i]
                if i > 0:
                    r += e[i - 1] * v[i - 1]
                if i < n - 1:
                    r += e[i] * v[i + 1]
                res += r * r
            res = np.sqrt(res)
            if res <= 1.0e-13 * tnorm:
                ok = True
                break
        return v, ok


def _tridiag_matvec(d, e, v):
    y = d * v
    if d.shape[0] > 1:
        y[:-1] += e * v[1:]
        y[1:] += e * v[:-1]
    return y


def _postprocess(d, e, vals, vecs):
    """Shared cleanup: orthonormalize, Rayleigh-refine, fix signs, sort."""
    n, k = vecs.shape
    for j in range(k):
        for _ in range(2):
            for i in range(j):
                vecs[:, j] -= (vecs[:, i] @ vecs[:, j]) * vecs[:, i]
        nrm = np.linalg.norm(vecs[:, j])
        if nrm == 0.0 or not np.isfinite(nrm):
            raise RuntimeError("eigenvector collapsed during orthogonalization")
        vecs[:, j] /= nrm
    refined = np.empty(k)
    for j in range(k):
        refined[j] = vecs[:, j] @ _tridiag_matvec(d, e, vecs[:, j])
        p = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[p, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    order = np.argsort(refined, kind="stable")
    return refined[order], vecs[:, order]


def _numba_smallest(d, e, k):
    tnorm = float(np.max(np.abs(d)))
    if d.shape[0] > 1:
        tnorm = max(
            tnorm, float(np.max(np.abs(d[:-1]) + np.abs(e))), float(np.max(np.abs(e)))
        )
    vals = _bisect_smallest(d, e, k)
    n = d.shape[0]
    vecs = np.empty((n, k))
    for j in range(k):
        got = False
        for attempt in range(4):
            seed = np.uint64(2654435761 * (j + 1) + 97 + 7919 * attempt)
            extra = _EPS * max(tnorm, 1.0) * (1.0 + 3.0 * attempt)
            v, ok = _inverse_iterate(d, e, float(vals[j]), seed, tnorm, extra)
            if ok or (attempt == 3 and np.all(np.isfinite(v))):
                vecs[:, j] = v
                got = True
                break
            if np.all(np.isfinite(v)):
                vecs[:, j] = v
                got = True
        if not got:
            raise RuntimeError(
                "inverse iteration failed for eigenvalue index %d (lambda=%g)"
                % (j, vals[j])
            )
    return _postprocess(d, e, vals, vecs)


def _scipy_smallest(d, e, k):
    from scipy.linalg import eigh_tridiagonal

    if d.shape[0] == 1:
        return d.copy(), np.ones((1, 1))
    vals, vecs = eigh_tridiagonal(
        d,
        e,
        select="i",
        select_range=(0, k - 1),
        check_finite=False,
        lapack_driver="stebz",
    )
    return _postprocess(d, e, vals, np.ascontiguousarray(vecs))


def tridiag_eigh_smallest(diag, offdiag, k, backend=None):
    """k smallest eigenpairs of the symmetric tridiagonal (diag, offdiag).

    Returns ``(vals, vecs)`` with vals ascending, vecs orthonormal columns.
    Deterministic for fixed input and backend.
    """
    d = np.ascontiguousarray(diag, dtype=np.float64)
    e = np.ascontiguousarray(offdiag, dtype=np.float64)
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if e.shape[0] != max(n - 1, 0):
        raise ValueError("offdiag must have length n-1")
    use = backend or BACKEND
    if use == "numba":
        if not _have_numba:
            raise RuntimeError("numba backend requested but numba is unavailable")
        if n == 1:
            return d.copy(), np.ones((1, 1))
        return _numba_smallest(d, e, k)
    if use in ("numpy", "scipy"):
        return _scipy_smallest(d, e, k)
    raise ValueError(f"unknown backend {use!r}")
