from __future__ import annotations

import numpy as np
import pytest

from bitflip_ft.experiments.vqe import (CAFFEINE, ObservableSpec, ansatz_energy, energy_gradient, epsilon_sweep,
                                        exact_ground_energy, group_basis, group_distribution,
                                        measurement_circuit, optimize_ansatz, vqe_energy)
from bitflip_ft.noise import NoiseSpec
from bitflip_ft.pauli import PauliString

E_EXACT = -667.7400


@pytest.fixture(scope="module")
def theta():
    return optimize_ansatz().theta


class TestHamiltonian:
    def test_grouping(self):
        bases = [group_basis(CAFFEINE, g) for g in CAFFEINE.groups]
        assert bases == [{0: "Z", 1: "Z"}, {0: "X", 1: "Z"}, {0: "Z", 1: "X"}, {0: "Y", 1: "Y"}]

    def test_incompatible_group_rejected(self):
        with pytest.raises(ValueError):
            ObservableSpec(((1.0, PauliString.from_label("X0")), (1.0, PauliString.from_label("Z0"))), ((0, 1),))

    def test_groups_partition(self):
        with pytest.raises(ValueError):
            ObservableSpec(((1.0, PauliString.from_label("X0")),), ((),))

    def test_exact_ground(self):
        assert exact_ground_energy() == pytest.approx(E_EXACT, abs=5e-5)

    def test_zero_angles_energy_by_hand(self):
        # |00>: Z0 = Z1 = Z0Z1 = +1, every other term averages to zero
        want = -667.4554308557676 - 2 * 0.1532273887412754 + 0.025969183085931477
        assert ansatz_energy([0, 0, 0, 0]) == pytest.approx(want, abs=1e-12)


class TestOptimization:
    def test_reaches_ground(self, theta):
        assert ansatz_energy(theta) == pytest.approx(E_EXACT, abs=5e-5)

    def test_multi_start_consistent(self):
        energies = [optimize_ansatz(seed=s, restarts=1).energy for s in range(5)]
        assert max(energies) - min(energies) < 1e-6

    def test_stationary(self, theta):
        assert np.linalg.norm(energy_gradient(theta)) < 1e-4


class TestEstimation:
    @pytest.mark.parametrize("variant", ["bare", "encoded", "encoded_with_EC"])
    def test_circuits_match_ansatz_noiselessly(self, variant, theta):
        total = CAFFEINE.identity
        for g in CAFFEINE.groups:
            dist, acc = group_distribution(theta, group_basis(CAFFEINE, g), variant, NoiseSpec())
            assert acc == pytest.approx(1.0)
            idx = np.arange(4)
            for i in g:
                c, P = CAFFEINE.terms[i]
                par = np.zeros(4, dtype=int)
                for q in P.letters:
                    par ^= (idx >> q) & 1
                total += c * dist @ (1 - 2 * par)
        assert total == pytest.approx(ansatz_energy(theta), abs=1e-9)

    def test_unbiased_at_zero_noise(self, theta):
        e = vqe_energy(theta, "bare", 20_000, NoiseSpec(), seed=2)
        assert abs(e.energy - e.exact) < 5 * e.stderr
        assert e.exact == pytest.approx(ansatz_energy(theta), abs=1e-9)

    def test_reproducible(self, theta):
        a = vqe_energy(theta, "bare", 1000, NoiseSpec(0.01), seed=2)
        b = vqe_energy(theta, "bare", 1000, NoiseSpec(0.01), seed=2)
        assert a.row() == b.row()

    def test_shot_counts(self, theta):
        e = vqe_energy(theta, "encoded", 1000, NoiseSpec(0.01), seed=2)
        assert e.accepted_shots == 4000 and e.raw_shots > 4000

    def test_basis_change_uses_gadgets(self):
        c, readout = measurement_circuit([0, 0, 0, 0], {0: "Y", 1: "Y"}, "encoded")
        assert c.n_qubits == 10 and len(readout) == 2

    def test_sweep_zero_epsilon_is_bit_flip(self, theta):
        a = epsilon_sweep(theta, [0.0], 1e-3, ["bare"], 1000, 3)[0]
        b = vqe_energy(theta, "bare", 1000, NoiseSpec(1e-3, 0.0), 3, stream=(0,))
        assert a.energy == b.energy

    def test_sweep_range(self, theta):
        with pytest.raises(ValueError):
            epsilon_sweep(theta, [1.5], 1e-3, ["bare"], 10, 0)
