import numpy as np
import pytest

from alphatrend import synth


@pytest.fixture(scope="session")
def universe():
    """One shared synthetic universe: (index panel, members panel)."""
    return synth.make_universe(n_days=900, n_constituents=6, seed=11)


@pytest.fixture(scope="session")
def index_panel(universe):
    return universe[0]


@pytest.fixture(scope="session")
def members_panel(universe):
    return universe[1]


def make_series(n, nan_frac=0.0, seed=0, scale=1.0):
    """Random test series with optional NaN holes poked in."""
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 1.0, n) * scale
    if nan_frac > 0:
        holes = rng.uniform(size=n) < nan_frac
        x[holes] = np.nan
    return x
