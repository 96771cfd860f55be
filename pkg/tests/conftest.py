import numpy as np
import pytest

from whataboutism import exceptions
from whataboutism import model

# Relative clearance kept from every open bound when drawing random
# parameters, so that polarization steps and sweeps stay admissible.
BOUND_MARGIN = 0.01

# Random sets avoid the breakdown boundary by at least this much.
THETA_MARGIN = 1e-3


@pytest.fixture
def reference_params():
    """The n=2 parameter set used throughout: lambda = 1 / (2 cbar)."""
    return model.validate(model.ModelParams(n=2, lam=0.25, g=(1.8, 1.2), b=(1.1, 1.9), cbar=2.0))


@pytest.fixture
def breakdown_params():
    """theta_m < 0 at every level, so M = n + 1."""
    return model.validate(model.ModelParams(n=2, lam=0.1, g=(1.95, 1.9), b=(1.05, 1.1)))


def draw_params(rng, n=None, max_n=4):
    """Draws a valid parameter set with every theta_m away from zero."""
    while True:
        size = int(rng.integers(1, max_n + 1)) if n is None else n
        low, high = 1.0 + BOUND_MARGIN, 2.0 - BOUND_MARGIN
        g = np.sort(rng.uniform(low, high, size))[::-1]
        b = np.sort(rng.uniform(low, high, size))
        lam = rng.uniform(BOUND_MARGIN, 0.5 - BOUND_MARGIN)
        params = model.ModelParams(n=size, lam=float(lam), g=tuple(g), b=tuple(b))
        try:
            model.validate(params)
        except exceptions.ValidationError:
            continue
        if np.min(np.abs(model.derive(params).theta)) > THETA_MARGIN:
            return params


def draw_params_with_pspe_choice(rng):
    """Draws parameters with at least one level above the breakdown threshold,
    i.e. with at least two PSPE.
    """
    while True:
        params = draw_params(rng)
        if model.derive(params).M <= params.n:
            return params


@pytest.fixture
def params_factory():
    """Returns a callable drawing random valid parameter sets from a seeded generator."""
    return draw_params


@pytest.fixture
def pspe_params_factory():
    return draw_params_with_pspe_choice
