import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spectra.density import make_density
from spectra.geometry import make_profile
from spectra.kernels import tridiag_eigh_smallest


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # pay the one-time jit compilation outside any timed assertion
    d = np.array([2.0, 2.0, 2.0, 2.0])
    e = np.array([-1.0, -1.0, -1.0])
    tridiag_eigh_smallest(d, e, 2)


@pytest.fixture(scope="session")
def disk():
    return make_profile("flat_ball", R=1.0, n=2)


@pytest.fixture(scope="session")
def ball3():
    return make_profile("flat_ball", R=1.0, n=3)


@pytest.fixture(scope="session")
def sphere2():
    return make_profile("round_sphere", n=2)


@pytest.fixture(scope="session")
def sphere3():
    return make_profile("round_sphere", n=3)


@pytest.fixture(scope="session")
def flat_density(disk):
    return make_density("constant", {}, disk)
