import math

import numpy as np
import pytest

from shotmeta.pauli import ground_state, h2_hamiltonian

E0 = -1.8671093666543512


def ground_theta_for(h):
    """Angles preparing the ground state: Ry on q0 followed by the CNOT."""
    _, vec = ground_state(h)
    theta = np.zeros(8)
    theta[0] = 2 * math.atan2(vec[3].real, vec[0].real)
    return theta


@pytest.fixture(scope="session")
def h2():
    return h2_hamiltonian()


@pytest.fixture(scope="session")
def ground_theta(h2):
    return ground_theta_for(h2)
