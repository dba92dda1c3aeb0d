import numpy as np
import pytest

from allmach.cases import CaseSpec
from allmach.mesh import build_uniform_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_case(name="synthetic", dim=1, extents=((0.0, 1.0),), counts=(8,),
              gamma=1.4, rho0=None, theta0=None, u0=None, t_end=1.0):
    """Small helper for synthetic initial data in unit tests."""
    if rho0 is None:
        rho0 = lambda *a: np.ones_like(np.asarray(a[0], dtype=float))
    if theta0 is None:
        theta0 = lambda *a: np.ones_like(np.asarray(a[0], dtype=float))
    if u0 is None:
        u0 = tuple(lambda *a: np.zeros_like(np.asarray(a[0], dtype=float))
                   for _ in range(dim))
    return CaseSpec(name=name, dim=dim, extents=extents, counts=counts,
                    gamma=gamma, eps_list=(1.0,), t_end=t_end,
                    snapshot_times=(), rho0=rho0, theta0=theta0, u0=u0)


def random_positive_field(rng, n, low=0.5, high=2.0):
    return rng.uniform(low, high, size=n)


@pytest.fixture
def mesh1d():
    return build_uniform_mesh(((0.0, 1.0),), (8,))


@pytest.fixture
def mesh2d():
    return build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (6, 4))
