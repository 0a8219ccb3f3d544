from __future__ import annotations

import numpy as np
import pytest

from dynlforge.catalog import NAMES, catalog_get


@pytest.fixture(scope="session")
def setups():
    return {name: catalog_get(name) for name in NAMES}


@pytest.fixture(scope="session")
def sl2(setups):
    return setups["sl2-cartan"]


@pytest.fixture(scope="session")
def so3(setups):
    return setups["so3-quadratic-AM"]


@pytest.fixture(scope="session")
def heis(setups):
    return setups["heisenberg-degenerate"]


@pytest.fixture(scope="session")
def ev(setups):
    return setups["sl2-ev-twist"]


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)
