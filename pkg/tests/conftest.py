import numpy as np
import pytest

from flexbeam import Actuator, BeamSystem, build_basis

TINY = 1e-12


def pure_beam(l=1.0, l0=0.5, alpha0=0.0):
    """Beam with a negligible shaker; modes tend to sin(n pi x / l)."""
    return BeamSystem(E=1.0, I=1.0, rho=1.0, l=l, l0=l0, m=TINY, kappa=TINY, alpha0=alpha0)


def loaded_beam(l0=0.37, m=0.2, kappa=50.0, alpha0=20.0, l=1.0):
    return BeamSystem(E=1.0, I=1.0, rho=1.0, l=l, l0=l0, m=m, kappa=kappa, alpha0=alpha0)


# fully coupled: generic shaker position and an actuator away from the common nodes
COUPLED_ACTUATOR = Actuator(center=0.71, width=0.17, height=1.0, alpha=100.0)


@pytest.fixture(scope="session")
def pure_basis():
    return build_basis(pure_beam(), n_modes=10)


@pytest.fixture(scope="session")
def loaded_basis():
    return build_basis(loaded_beam(), n_modes=15)


@pytest.fixture(scope="session")
def symmetric_basis():
    # shaker in the middle: every antisymmetric mode has a node at l0
    return build_basis(loaded_beam(l0=0.5, alpha0=5.0), n_modes=10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
