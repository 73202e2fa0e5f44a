from __future__ import annotations

import numpy as np
import pytest

from bitflip_ft.circuit import Circuit, Condition
from bitflip_ft.engines import (BitEngine, CapacityError, DensityEngine, TrajectoryEngine, ZeroAcceptance,
                                evolve_density)
from bitflip_ft.gates import CNOT, H, Rz, X
from bitflip_ft.noise import NoiseSpec
from bitflip_ft.pauli import PauliString
from bitflip_ft.states import DensityMatrix, StateVector, apply_gate


def bell_with_feedback() -> Circuit:
    c = Circuit(3)
    c.gate(H(0)).gate(CNOT(0, 1))
    k = c.measure(0)
    c.cond(X(2), Condition((k,), (False, True)))
    return c


class TestDensityEngine:
    def test_noiseless_matches_state_vector(self):
        c = Circuit(2).gate(H(0)).gate(CNOT(0, 1)).gate(Rz(1, 0.3))
        rho, acc = evolve_density(DensityMatrix.zero(2), c)
        s = StateVector.zero(2)
        for ins in c:
            s = apply_gate(s, ins.gate)
        assert acc == pytest.approx(1.0)
        np.testing.assert_allclose(rho.entries, s.density().entries, atol=1e-12)

    def test_feedback_copies_measurement(self):
        eng = DensityEngine(3).run(bell_with_feedback())
        d = eng.diagonal()
        assert d[0] == pytest.approx(0.5) and d[0b111] == pytest.approx(0.5)
        assert eng.branches and all(rec == () for rec in eng.branches)

    def test_keep_records(self):
        eng = DensityEngine(3, keep_records=True).run(bell_with_feedback())
        assert len(eng.branches) == 2

    def test_bit_flip_channel(self):
        c = Circuit(1).gate(X(0))
        d = DensityEngine(1, NoiseSpec(0.1)).run(c).diagonal()
        np.testing.assert_allclose(d, [0.1, 0.9])

    def test_noisy_prep(self):
        c = Circuit(1).reset(0)
        d = DensityEngine(1, NoiseSpec(0.2, noisy_prep=True, gate_noise=False)).run(c).diagonal()
        np.testing.assert_allclose(d, [0.8, 0.2])

    def test_injected_fault(self):
        c = Circuit(2).gate(CNOT(0, 1))
        eng = DensityEngine(2).run(c, fault=(0, PauliString({1: "X"})))
        assert eng.diagonal()[2] == pytest.approx(1.0)

    def test_postselection_and_acceptance(self):
        c = Circuit(1).gate(H(0))
        k = c.measure(0)
        c.postselect(Condition((k,), (True, False)))
        eng = DensityEngine(1).run(c)
        assert eng.acceptance() == pytest.approx(0.5)
        assert eng.discarded == pytest.approx(0.5)

    def test_zero_acceptance(self):
        c = Circuit(1).gate(X(0))
        k = c.measure(0)
        c.postselect(Condition((k,), (True, False)))
        with pytest.raises(ZeroAcceptance):
            DensityEngine(1).run(c)
        assert DensityEngine(1).run(c, strict=False).branches == {}

    def test_capacity(self):
        with pytest.raises(CapacityError):
            DensityEngine(13)


class TestSamplers:
    def test_trajectory_frequencies(self, rng):
        c = Circuit(2).gate(H(0)).gate(CNOT(0, 1))
        eng = TrajectoryEngine(2, 20_000, NoiseSpec(0.05), rng).run(c)
        exact = DensityEngine(2, NoiseSpec(0.05)).run(c).diagonal()
        counts = np.bincount(eng.sample_bits(), minlength=4)
        sigma = np.sqrt(20_000 * exact * (1 - exact)) + 1e-9
        assert np.all(np.abs(counts - 20_000 * exact) < 5 * sigma)

    def test_trajectory_postselection_tracks_ids(self, rng):
        c = Circuit(1).gate(H(0))
        k = c.measure(0)
        c.postselect(Condition((k,), (True, False)))
        eng = TrajectoryEngine(1, 1000, NoiseSpec(), rng).run(c)
        assert len(eng) == len(eng.shot_ids) and 400 < len(eng) < 600

    def test_bit_engine_matches_density(self, rng):
        c = Circuit(3).gate(X(0)).gate(CNOT(0, 1)).gate(CNOT(1, 2))
        eng = BitEngine(3, 50_000, NoiseSpec(0.05), rng).run(c)
        idx = eng.bits @ (1 << np.arange(3))
        counts = np.bincount(idx, minlength=8)
        exact = DensityEngine(3, NoiseSpec(0.05)).run(c).diagonal()
        sigma = np.sqrt(50_000 * exact * (1 - exact)) + 1e-9
        assert np.all(np.abs(counts - 50_000 * exact) < 5 * sigma)

    def test_bit_engine_rejects_hadamard(self, rng):
        with pytest.raises(ValueError):
            BitEngine(1, 10, NoiseSpec(), rng).run(Circuit(1).gate(H(0)))

    def test_seeded_reproducibility(self):
        c = Circuit(2).gate(X(0)).gate(CNOT(0, 1))
        a = BitEngine(2, 1000, NoiseSpec(0.1), np.random.default_rng(5)).run(c).bits
        b = BitEngine(2, 1000, NoiseSpec(0.1), np.random.default_rng(5)).run(c).bits
        assert np.array_equal(a, b)
