from __future__ import annotations

import pytest

from bitflip_ft.experiments.crosscheck import cross_check, crosscheck_circuit


def test_prep_plus_i_small():
    r = cross_check("prep_plus_i", 0.05, 20_000, 1)
    assert r.within(5.0)
    assert 0 < r.accepted < r.shots


def test_unknown_gadget():
    with pytest.raises(ValueError):
        crosscheck_circuit("H_L")
