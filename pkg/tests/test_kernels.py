import numpy as np
import pytest

from spectra.kernels import numba_available, tridiag_eigh_smallest

BACKENDS = ["numpy"] + (["numba"] if numba_available() else [])


def random_tridiag(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n) + 4.0
    e = rng.normal(size=n - 1)
    return d, e


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_dense_eigendecomposition(backend):
    d, e = random_tridiag(300, 7)
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    ref = np.sort(np.linalg.eigvalsh(T))
    vals, vecs = tridiag_eigh_smallest(d, e, 6, backend=backend)
    scale = np.abs(T).sum(axis=1).max()
    assert np.abs(vals - ref[:6]).max() < 1e-12 * scale
    res = np.linalg.norm(T @ vecs - vecs * vals, axis=0)
    assert res.max() < 1e-12 * scale
    assert np.abs(vecs.T @ vecs - np.eye(6)).max() < 1e-10


@pytest.mark.skipif(not numba_available(), reason="numba not installed")
def test_backends_agree():
    d, e = random_tridiag(1500, 3)
    w1, v1 = tridiag_eigh_smallest(d, e, 8, backend="numpy")
    w2, v2 = tridiag_eigh_smallest(d, e, 8, backend="numba")
    scale = np.abs(d).max() + 2 * np.abs(e).max()
    assert np.abs(w1 - w2).max() < 1e-11 * scale
    # same sign convention, so the vectors themselves should line up
    assert np.abs(np.abs(np.sum(v1 * v2, axis=0)) - 1.0).max() < 1e-7


@pytest.mark.parametrize("backend", BACKENDS)
def test_deterministic(backend):
    d, e = random_tridiag(800, 11)
    w1, v1 = tridiag_eigh_smallest(d, e, 5, backend=backend)
    w2, v2 = tridiag_eigh_smallest(d, e, 5, backend=backend)
    assert np.array_equal(w1, w2)
    assert np.array_equal(v1, v2)


@pytest.mark.parametrize("backend", BACKENDS)
def test_near_degenerate_pair(backend):
    # two identical decoupled blocks give an exactly degenerate pair
    d = np.array([1.0, 1.0, 1.0, 1.0])
    e = np.array([0.5, 0.0, 0.5])
    vals, vecs = tridiag_eigh_smallest(d, e, 2, backend=backend)
    assert np.allclose(vals, [0.5, 0.5], atol=1e-12)
    assert abs(vecs[:, 0] @ vecs[:, 1]) < 1e-10


def test_input_validation():
    d = np.ones(4)
    e = np.zeros(3)
    with pytest.raises(ValueError):
        tridiag_eigh_smallest(d, e, 0)
    with pytest.raises(ValueError):
        tridiag_eigh_smallest(d, e, 5)
    with pytest.raises(ValueError):
        tridiag_eigh_smallest(d, np.zeros(2), 1)


def test_single_row():
    vals, vecs = tridiag_eigh_smallest(np.array([3.0]), np.zeros(0), 1)
    assert vals[0] == 3.0 and vecs[0, 0] == 1.0
