from __future__ import annotations

import numpy as np
import pytest

from dynlforge.catalog import NAMES, catalog_get, ev_t_alpha
from dynlforge.errors import UnknownName


@pytest.mark.parametrize("name", NAMES)
def test_entries_validate(name):
    G = catalog_get(name)
    assert G.report.ok
    assert G.bidynamical
    assert G.n <= 6


def test_ev_variants():
    empty = catalog_get("sl2-ev-twist(empty)")
    mu = catalog_get("sl2-ev-twist(alpha, 1.5)")
    assert ev_t_alpha("empty", 0.7) == 1.0
    assert np.max(np.abs(empty.w - mu.w)) > 0.1
    assert mu.name == "sl2-ev-twist(alpha,1.5)"


@pytest.mark.parametrize("name", ["sl3", "sl2-ev-twist(beta)", "sl2-ev-twist(alpha, x)", "sl2-ev-twist(alpha, 0)"])
def test_unknown(name):
    with pytest.raises(UnknownName):
        catalog_get(name)


def test_heisenberg_labels():
    G = catalog_get("heisenberg-degenerate")
    assert G.basis.labels == ("z", "x", "y")
    assert G.c[1, 2, 0] == 1.0
