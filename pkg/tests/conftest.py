"""Shared fixtures: the two reference parameter regimes and an expensive
long endemic trajectory reused by the ergodicity checks."""

import numpy as np
import pytest

from sirslab import ModelParams, SimConfig, simulate_path
from sirslab.incidence import IncidenceSpec

# Reference rate constants for both regimes (only beta differs).
BASE = dict(lam=0.05, mu=0.05, gamma=0.035, delta=0.005, eta=0.002,
            sigma=0.05, tau=10.0)


@pytest.fixture(scope="session")
def disease_free_params():
    return ModelParams(beta=0.08, **BASE)


@pytest.fixture(scope="session")
def endemic_params():
    return ModelParams(beta=0.2, **BASE)


def make_sim(params, t_end, dt=0.1, **kw):
    return SimConfig(params=params, incidence=IncidenceSpec.dirac(params.tau),
                     t_end=t_end, dt=dt, **kw)


@pytest.fixture(scope="session")
def long_endemic_path(endemic_params):
    """One long endemic trajectory (horizon 1e5, recorded every step)."""
    cfg = make_sim(endemic_params, t_end=1e5, record_stride=10)
    return simulate_path(cfg, seed=2024)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
