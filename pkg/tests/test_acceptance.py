"""Acceptance criteria, each at its stated tolerance.

A summary line per criterion is printed at the end of the run.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from bitflip_ft.experiments.benchmark import BenchmarkConfig, run_benchmark
from bitflip_ft.experiments.crosscheck import CROSSCHECK_GADGETS, cross_check
from bitflip_ft.experiments.ising import (IsingConfig, dense_magnetization, discard_rate_fit,
                                          integrated_error_curve, run_ising)
from bitflip_ft.experiments.vqe import epsilon_sweep, exact_ground_energy, optimize_ansatz, vqe_energy
from bitflip_ft.noise import NoiseSpec
from bitflip_ft.oracle import (ANALYSIS_RULE, DEFAULT_ANALYSIS_RULE, IDENTITY, REFERENCE_EXPANSIONS, VIOLATION,
                               derive_expansion, gadget_case, location_outcome, verify_all)
from bitflip_ft.repcode import DOUBLE_ROUND_ROWS, SINGLE_ROUND_TABLE, Syndrome, decode_double, decode_single, \
    logical_error_rate
from bitflip_ft.pauli import PauliString

SEED = 2024
E_TABLE = -667.7400


# ---------------------------------------------------------------- 1. coefficients

@pytest.fixture(scope="module")
def reports():
    return verify_all()


def _label(r) -> str:
    tag = r.name if r.outcome is None else f"{r.name}[{r.outcome}]"
    return tag + (f"@{r.theta:.3f}" if r.theta is not None else "")


@pytest.mark.parametrize("name,outcome", [(n, k) for n, d in REFERENCE_EXPANSIONS.items() for k in d])
def test_c1_expansion(name, outcome, reports, criterion):
    mine = [r for r in reports if r.name == name and r.outcome == outcome]
    assert mine
    for r in mine:
        ok = r.passed and all(abs(a - b) <= 1e-9 for a, b in zip(r.derived, r.expected))
        detail = f"{_label(r)} {'ok' if ok else f'derived {np.round(r.derived, 9).tolist()} vs {r.expected}'}"
        criterion(1, ok, detail)
        assert ok, detail


# ---------------------------------------------------------------- 2. bias preservation

GADGETS = ["ec2", "ec3", "prep_plus", "prep_plus_i", "CZ_L", "S_L", "H_L", "Rz_L", "CNOT_L", "X_L", "Y_L",
           "Z_L", "MeasX_L"]


@pytest.mark.parametrize("name", GADGETS)
def test_c2_no_violation(name, criterion):
    rule = ANALYSIS_RULE.get(name, DEFAULT_ANALYSIS_RULE)
    der = derive_expansion(gadget_case(name, postselect=rule))
    ok = not der.violations
    criterion(2, ok, f"{name}: {len(der.violations)} violations over {len(der.sites)} sites")
    assert ok


def test_c2_naive_control_violates(criterion):
    der = derive_expansion(gadget_case("naive_prep_plus_i"))
    ok = bool(der.violations)
    criterion(2, ok, f"naive transversal S control: {len(der.violations)} violations")
    assert ok


# ---------------------------------------------------------------- 3. decoding tables

TABLE_I = {(1, 1): "I", (-1, 1): "X1", (-1, -1): "X2", (1, -1): "X3"}


def _fb(label: str) -> PauliString:
    return PauliString() if label == "I" else PauliString({int(label[1]) - 1: "X"})


def test_c3_decode_tables(criterion):
    single = all(decode_single(Syndrome(*s)) == _fb(f) for s, f in TABLE_I.items())
    single &= set(SINGLE_ROUND_TABLE) == set(TABLE_I)
    double = len(DOUBLE_ROUND_ROWS) == 19
    for loc, s0, s1, fb in DOUBLE_ROUND_ROWS:
        synd, cls = location_outcome(loc, rounds=2)
        want = PauliString() if fb is None else PauliString({fb: "X"})
        double &= synd == [s0, s1] and decode_double(Syndrome(*s0), Syndrome(*s1)) == want
        double &= cls == IDENTITY or isinstance(cls, tuple)
    _, one_round = location_outcome(5, rounds=1)
    _, two_round = location_outcome(5, rounds=2)
    ft = one_round == VIOLATION and two_round != VIOLATION
    ok = single and double and ft
    criterion(3, ok, f"table I {single}, 19 double-round rows {double}, location 5: 1-round {one_round}, "
                     f"2-round {two_round}")
    assert ok


# ---------------------------------------------------------------- 4. benchmark

def _bench(d, p, variant, shots=100_000):
    return run_benchmark(BenchmarkConfig(d, p, shots, variant), SEED)


@pytest.mark.slow
def test_c4_depth_one(criterion):
    p = 0.01
    bare = 1 - _bench(1, p, "bare").fidelity
    enc = 1 - _bench(1, p, "encoded").fidelity
    ok_b = bare >= 0.5 * p
    ok_e = enc <= 20 * p ** 2
    criterion(4, ok_b, f"d=1 bare infidelity {bare:.4f} >= {0.5 * p}")
    criterion(4, ok_e, f"d=1 encoded infidelity {enc:.4f} <= {20 * p ** 2:.4f}")
    assert ok_b and ok_e


@pytest.fixture(scope="module")
def deep():
    return {(v, d): _bench(d, 1e-3, v) for v in ("bare", "encoded", "encoded_with_EC") for d in (64, 128, 256, 512)}


@pytest.mark.slow
def test_c4_randomized_without_ec(deep, criterion):
    f = deep[("encoded", 512)].fidelity
    ok = abs(f - 0.25) <= 0.02
    criterion(4, ok, f"d=512 encoded F={f:.4f} (0.25 +- 0.02)")
    assert ok


@pytest.mark.slow
def test_c4_ec_keeps_fidelity(deep, criterion):
    f = deep[("encoded_with_EC", 512)].fidelity
    ok = f >= 0.9
    criterion(4, ok, f"d=512 encoded+EC F={f:.4f} (>= 0.9)")
    assert ok


@pytest.mark.slow
def test_c4_ordering(deep, criterion):
    bad = []
    for d in (64, 128, 256, 512):
        b, e, c = (deep[(v, d)] for v in ("bare", "encoded", "encoded_with_EC"))
        # equal fidelities at full randomization differ only by shot noise
        for lo, hi in ((b, e), (e, c)):
            if lo.fidelity > hi.fidelity + 5 * math.hypot(lo.stderr, hi.stderr):
                bad.append((d, lo.config.variant, hi.config.variant))
    ok = not bad
    criterion(4, ok, f"ordering bare <= encoded <= encoded+EC for d>=64 (5 sigma): {'holds' if ok else bad}")
    assert ok


# ---------------------------------------------------------------- 5. Ising

@pytest.fixture(scope="module")
def ising():
    out = {"noiseless": run_ising(IsingConfig(n_trot=50, shots=10_000), SEED)}
    for v in ("bare", "encoded", "encoded_with_EC"):
        out[v] = run_ising(IsingConfig(n_trot=50, shots=10_000, variant=v, p=1e-3), SEED)
    return out


@pytest.mark.slow
def test_c5_noiseless_matches_oracle(ising, criterion):
    s = ising["noiseless"]
    oracle = dense_magnetization(2, 1.0, 0.1, 50)
    z = np.abs(s.m - oracle) / np.maximum(s.m_stderr, 1e-12)
    ok = bool(np.all(z <= 5))
    criterion(5, ok, f"noiseless M vs dense oracle, max deviation {z.max():.2f} sigma over t<=5")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["encoded", "encoded_with_EC"])
def test_c5_integrated_error(ising, variant, criterion):
    oracle = dense_magnetization(2, 1.0, 0.1, 50)
    n = 20  # t <= 2
    e_bare = integrated_error_curve(oracle, ising["bare"].m)[:n]
    e_enc = integrated_error_curve(oracle, ising[variant].m)[:n]
    ok = bool(np.all(e_enc < e_bare))
    criterion(5, ok, f"{variant} E(t=2)={e_enc[-1]:.4f} < bare {e_bare[-1]:.4f} at every t<=2")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("variant,target", [("encoded", 0.59), ("encoded_with_EC", 0.66)])
def test_c5_discard_fit(ising, variant, target, criterion):
    s = ising[variant]
    fit = discard_rate_fit(s.times, s.discard_rate)
    ok = abs(fit.a - target) <= 0.2
    criterion(5, ok, f"{variant} discard fit a={fit.a:.3f} ({target} +- 0.2)")
    assert ok


# ---------------------------------------------------------------- 6. VQE

@pytest.fixture(scope="module")
def theta():
    return optimize_ansatz(seed=SEED).theta


def test_c6_exact_diagonalization(criterion):
    e = exact_ground_energy()
    ok = abs(e - E_TABLE) <= 5e-5
    criterion(6, ok, f"exact ground {e:.6f} (-667.7400 +- 5e-5)")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["encoded", "encoded_with_EC"])
def test_c6_noisy_encoded(theta, variant, criterion):
    e0 = exact_ground_energy()
    est = vqe_energy(theta, variant, 10_000_000, NoiseSpec(1e-3), SEED)
    err = abs(est.energy - e0)
    ok = err <= 1.5e-3
    criterion(6, ok, f"{variant} 1e7 shots/group |E-E0|={err * 1e3:.3f} mHa (<= 1.5)")
    assert ok


@pytest.mark.parametrize("variant", ["encoded", "encoded_with_EC"])
def test_c6_smoke(theta, variant, criterion):
    e0 = exact_ground_energy()
    est = vqe_energy(theta, variant, 100_000, NoiseSpec(1e-3), SEED)
    err = abs(est.energy - e0)
    ok = err <= 5e-3
    criterion(6, ok, f"{variant} smoke 1e5 shots/group |E-E0|={err * 1e3:.3f} mHa (<= 5)")
    assert ok


# ---------------------------------------------------------------- 7. epsilon sweep

@pytest.fixture(scope="module")
def sweep(theta):
    rows = epsilon_sweep(theta, [1e-4, 1e-3, 1e-1], 1e-3, ["bare", "encoded", "encoded_with_EC"], 1_000_000, SEED)
    e0 = exact_ground_energy()
    return {(r.epsilon, r.variant): abs(r.energy - e0) for r in rows}


@pytest.mark.slow
@pytest.mark.parametrize("eps", [1e-4, 1e-3])
@pytest.mark.parametrize("variant", ["encoded", "encoded_with_EC"])
def test_c7_encoded_wins_at_small_bias_leak(sweep, eps, variant, criterion):
    enc, bare = sweep[(eps, variant)], sweep[(eps, "bare")]
    ok = enc < bare
    criterion(7, ok, f"eps={eps:g} {variant} {enc * 1e3:.3f} < bare {bare * 1e3:.3f} mHa")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["encoded", "encoded_with_EC"])
def test_c7_advantage_gone(sweep, variant, criterion):
    enc, bare = sweep[(0.1, variant)], sweep[(0.1, "bare")]
    ok = enc >= bare
    criterion(7, ok, f"eps=0.1 {variant} {enc * 1e3:.3f} >= bare {bare * 1e3:.3f} mHa")
    assert ok


# ---------------------------------------------------------------- 8. cross-oracle

@pytest.mark.parametrize("name", CROSSCHECK_GADGETS)
def test_c8_trajectories_vs_density(name, criterion):
    r = cross_check(name, 0.05, 100_000, SEED)
    ok = r.within(5.0)
    criterion(8, ok, f"{name} acceptance {r.acceptance_z:+.2f} sigma, worst outcome {r.max_outcome_z:.2f} sigma")
    assert ok


# ---------------------------------------------------------------- 9. formula

def test_c9_logical_error_rate(criterion):
    ps = np.random.default_rng(SEED).uniform(0, 1, 20)
    worst = max(abs(logical_error_rate(3, p) - (3 * p ** 2 - 2 * p ** 3)) for p in ps)
    ok = worst <= 1e-12
    criterion(9, ok, f"20 random p, worst |diff| {worst:.1e}")
    assert ok
