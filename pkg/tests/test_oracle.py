from __future__ import annotations

import json

import numpy as np
import pytest

from bitflip_ft.circuit import Circuit
from bitflip_ft.engines import DensityEngine
from bitflip_ft.gadgets import logical_cnot
from bitflip_ft.gates import CNOT, H
from bitflip_ft.oracle import (ANALYSIS_RULE, DEFAULT_ANALYSIS_RULE, IDENTITY, REFERENCE_EXPANSIONS, VIOLATION,
                               AmbiguousClassification, ErrorExpansion, bias_scan, FaultSite, classify_output,
                               derive_expansion, ec_case, enumerate_faults, expansion_by_channel,
                               expansion_from, gadget_case, location_outcome, location_site, propagate,
                               report_json, run_with_fault, verify_gadget)
from bitflip_ft.pauli import PauliString
from bitflip_ft.repcode import DOUBLE_ROUND_ROWS, CodeBlock, encoded_state
from bitflip_ft.states import DensityMatrix, StateVector

B = CodeBlock((0, 1, 2))


def _rule(name: str) -> str:
    return ANALYSIS_RULE.get(name, DEFAULT_ANALYSIS_RULE)


class TestFaultSites:
    def test_count_matches_gate_wires(self):
        case = ec_case(2)
        one, two = case.circuit.gate_count()
        assert len(enumerate_faults(case.circuit)) == one + 2 * two
        assert len(enumerate_faults(case.circuit, incoming=(0, 1, 2))) == one + 2 * two + 3

    def test_location_sites(self):
        assert location_site(1) == FaultSite(-1, 0)
        assert location_site(4) == FaultSite(0, 0)
        assert location_site(12) == FaultSite(8, 0)
        with pytest.raises(ValueError):
            location_site(20)


class TestClassify:
    psi = encoded_state(3, [B], np.array([0.6, 0.8]))

    def test_identity(self):
        assert classify_output(self.psi.density(), self.psi, [B]) == IDENTITY

    def test_single_flip(self):
        P = PauliString({1: "X"}).matrix(3)
        rho = DensityMatrix(3, P @ self.psi.density().entries @ P)
        assert classify_output(rho, self.psi, [B]) == (0, 1)

    def test_phase_error_is_violation(self):
        P = PauliString({0: "Z"}).matrix(3)
        rho = DensityMatrix(3, P @ self.psi.density().entries @ P)
        assert classify_output(rho, self.psi, [B]) == VIOLATION

    def test_ambiguous(self):
        psi = StateVector(3, np.ones(8) / np.sqrt(8))
        with pytest.raises(AmbiguousClassification):
            classify_output(psi.density(), psi, [B])


class TestExpansion:
    def test_identity_is_minus_sum(self):
        e = expansion_from([3, 2, 2])
        assert e.identity_coeff == -7
        assert e.as_list(1) == [3.0, 2.0, 2.0]
        assert e.matches(expansion_from([3, 2, 2]), 1)
        assert not e.matches(ErrorExpansion(), 1)

    @pytest.mark.parametrize("name", ["ec2", "ec3", "prep_plus", "prep_plus_i", "CZ_L", "S_L", "H_L", "Rz_L"])
    def test_two_routes_agree(self, name):
        case = gadget_case(name, postselect=_rule(name))
        der = derive_expansion(case, n_inputs=1)
        by_channel = expansion_by_channel(case)
        assert set(by_channel) == set(der.expansions)
        for k, row in by_channel.items():
            np.testing.assert_allclose(der.expansions[k].as_list(der.n_blocks), row, atol=1e-4)

    def test_naive_control_violates(self):
        der = derive_expansion(gadget_case("naive_prep_plus_i"))
        assert der.violations

    def test_verify_reports(self):
        reps, der = verify_gadget("ec2")
        assert len(reps) == 1 and reps[0].passed and not der.violations
        assert json.loads(report_json(reps))["expansions"][0]["status"] == "PASS"

    def test_bias_scan(self):
        scan = bias_scan(["X_L", "MeasX_L"])
        assert [s["status"] for s in scan] == ["PASS", "PASS"]
        assert scan[1]["sites"] == 24

    def test_x_measurement_is_bias_preserving(self):
        der = derive_expansion(gadget_case("MeasX_L"))
        assert der.violations == []
        assert set(der.expansions) == {0, 1}
        by_channel = expansion_by_channel(gadget_case("MeasX_L"))
        for k, exp in der.expansions.items():
            np.testing.assert_allclose(exp.as_list(1), by_channel[k], atol=1e-4)

    def test_x_measurement_projects_input(self):
        case = gadget_case("MeasX_L")
        v = np.array([0.6, 0.8j])
        plus, minus = case.ideal_for(v, 0), case.ideal_for(v, 1)
        assert np.isclose(abs(np.vdot([1, 1], plus)) ** 2, 2)
        assert np.isclose(abs(np.vdot([1, -1], minus)) ** 2, 2)

    def test_references_cover_all_published_gadgets(self):
        n = sum(len(v) for v in REFERENCE_EXPANSIONS.values())
        assert n == 11


class TestLocations:
    @pytest.mark.parametrize("loc,s0,s1,fb", DOUBLE_ROUND_ROWS)
    def test_two_round_history_and_output(self, loc, s0, s1, fb):
        synd, cls = location_outcome(loc, rounds=2)
        assert synd == [s0, s1]
        assert cls == IDENTITY or (isinstance(cls, tuple) and cls[0] == 0)

    def test_single_round_fails_at_location_5(self):
        _, cls = location_outcome(5, rounds=1)
        assert cls == VIOLATION


class TestPropagation:
    def test_matches_density_engine(self):
        c = Circuit(6)
        c.gate(H(0))
        logical_cnot(c, B, CodeBlock((3, 4, 5)))
        c.gate(CNOT(4, 2))
        start = 1
        P = PauliString({0: "X"})
        out = propagate(P, c, start)
        clean = DensityEngine(6).run(c).density().entries
        faulty = DensityEngine(6).run(c, fault=(start, P)).density().entries
        M = out.matrix(6)
        np.testing.assert_allclose(faulty, M @ clean @ M.conj().T, atol=1e-12)

    def test_rejects_measurement(self):
        c = Circuit(1)
        c.measure(0)
        with pytest.raises(ValueError):
            propagate(PauliString({0: "X"}), c, -1)


def test_run_with_incoming_fault():
    case = ec_case(2)
    rho = encoded_state(4, [B], np.array([1.0, 0.0])).density()
    branches, discarded = run_with_fault(case.circuit, FaultSite(-1, 1), rho)
    assert discarded == 0 and len(branches) == 1
