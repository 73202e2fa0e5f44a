from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from bitflip_ft.engines import DensityEngine
from bitflip_ft.experiments.ising import (IsingConfig, dense_magnetization, dense_trotter_step,
                                          discard_rate_fit, encoded_trotter, exact_magnetization,
                                          integrated_error, integrated_error_curve, ising_hamiltonian,
                                          run_ising, trotter_circuit)
from bitflip_ft.pauli import PauliString


class TestCircuit:
    def test_one_step_matches_matrix_product(self):
        cfg = IsingConfig(n_trot=1)
        rho = DensityEngine(2).run(trotter_circuit(cfg)).density().entries
        u = dense_trotter_step(2, 1.0, 0.1)
        psi = u[:, 0]
        np.testing.assert_allclose(rho, np.outer(psi, psi.conj()), atol=1e-10)

    def test_step_is_product_of_term_exponentials(self):
        zz = PauliString.from_label("Z0 Z1").matrix(2)
        x0, x1 = PauliString.from_label("X0").matrix(2), PauliString.from_label("X1").matrix(2)
        d = 0.1
        want = expm(-1j * d * x1) @ expm(-1j * d * zz) @ expm(-1j * d * x0) @ expm(-1j * d * zz)
        np.testing.assert_allclose(dense_trotter_step(2, 1.0, d), want, atol=1e-12)

    def test_initial_magnetization(self):
        assert exact_magnetization(2, 1.0, [0.0])[0] == pytest.approx(2.0)

    def test_trotter_error_first_order(self):
        m_exact = exact_magnetization(2, 1.0, [1.0])[0]
        errs = [abs(dense_magnetization(2, 1.0, 1.0 / k, k)[-1] - m_exact) for k in (10, 20)]
        assert errs[1] < errs[0]
        assert errs[0] < 0.2

    def test_hamiltonian_two_sites(self):
        h = ising_hamiltonian(2, 0.5)
        want = 2 * PauliString.from_label("Z0 Z1").matrix(2) + 0.5 * (
            PauliString.from_label("X0").matrix(2) + PauliString.from_label("X1").matrix(2))
        np.testing.assert_allclose(h, want)

    def test_encoded_noiseless_matches_bare(self):
        cfg = IsingConfig(n_trot=2, variant="encoded", shots=100)
        s = run_ising(cfg, 0)
        np.testing.assert_allclose(s.exact_m, dense_magnetization(2, 1.0, 0.1, 2), atol=1e-9)
        np.testing.assert_allclose(s.acceptance, 1.0)

    def test_encoded_layout_per_step(self):
        reg, bounds, layouts = encoded_trotter(IsingConfig(n_trot=3, variant="encoded_with_EC"))
        assert len(bounds) == len(layouts) == 3 and bounds[-1] == len(reg.circuit)

    def test_encoded_needs_two_sites(self):
        with pytest.raises(ValueError):
            IsingConfig(n_sites=3, variant="encoded")

    def test_bare_three_sites(self):
        s = run_ising(IsingConfig(n_sites=3, n_trot=3, shots=10), 0)
        np.testing.assert_allclose(s.exact_m, dense_magnetization(3, 1.0, 0.1, 3), atol=1e-10)


class TestSeries:
    def test_noiseless_shots_within_five_sigma(self):
        s = run_ising(IsingConfig(n_trot=20, shots=2000), 4)
        d = dense_magnetization(2, 1.0, 0.1, 20)
        sigma = np.maximum(s.m_stderr, 1e-12)
        assert np.all(np.abs(s.m - d) <= 5 * sigma + 1e-12)

    def test_reproducible(self):
        cfg = IsingConfig(n_trot=3, shots=100, p=0.01)
        assert run_ising(cfg, 5).rows() == run_ising(cfg, 5).rows()

    def test_discard_grows_with_depth(self):
        s = run_ising(IsingConfig(n_trot=4, variant="encoded", p=0.01, shots=100), 0)
        assert np.all(np.diff(s.acceptance) < 0)


class TestIntegratedError:
    def test_identical(self):
        assert integrated_error([1, 2, 3], [1, 2, 3]) == 0

    @pytest.mark.parametrize("n", [1, 7, 50])
    def test_offset(self, n):
        a = np.linspace(0, 1, n)
        assert integrated_error(a, a + 0.1) == pytest.approx(0.1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            integrated_error([1, 2], [1])

    def test_curve(self):
        np.testing.assert_allclose(integrated_error_curve([0, 0], [1, 3]), [1, 2])


class TestDiscardFit:
    def test_recovers_generator(self):
        t = np.linspace(0.1, 5, 50)
        fit = discard_rate_fit(t, 1 - np.exp(-0.5 * t))
        assert fit.a == pytest.approx(0.5, abs=1e-6) and fit.residual < 1e-12

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            discard_rate_fit([1, 2], [0, 0])

    def test_range_checked(self):
        with pytest.raises(ValueError):
            discard_rate_fit([1, 2], [0.1, 1.2])
