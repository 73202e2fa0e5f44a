"""Trotterized transverse-field Ising dynamics, bare and on encoded qubits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import curve_fit

from ..circuit import Circuit
from ..engines import DensityEngine
from ..gadgets import DEFAULT_POSTSELECT, LogicalRegister
from ..gates import CNOT, Rx, Rz
from ..noise import NoiseSpec
from .common import VARIANTS, check_variant, decoded_distribution, rng_for, sample_counts, \
    sample_raw_shots, slice_circuit


@dataclass(frozen=True)
class IsingConfig:
    n_sites: int = 2
    h: float = 1.0
    delta: float = 0.1
    n_trot: int = 50
    shots: int = 10_000
    variant: str = "bare"
    p: float = 0.0
    epsilon: float = 0.0
    postselect: str = DEFAULT_POSTSELECT

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.n_sites < 2:
            raise ValueError("the chain needs at least two sites")
        if self.n_trot < 1 or self.shots < 1:
            raise ValueError("n_trot and shots must be positive")
        check_variant(self.variant)
        if self.variant != "bare" and self.n_sites != 2:
            raise ValueError("encoded chains are built for two sites only")


@dataclass(frozen=True)
class FitResult:
    a: float
    residual: float


@dataclass(frozen=True)
class IsingSeries:
    config: IsingConfig
    times: np.ndarray
    exact_m: np.ndarray  # noiseless-weight magnetization of the simulated circuit
    m: np.ndarray  # shot estimate
    m_stderr: np.ndarray
    acceptance: np.ndarray
    raw_shots: np.ndarray

    @property
    def discard_rate(self) -> np.ndarray:
        return 1.0 - self.config.shots / self.raw_shots

    def rows(self) -> list[dict]:
        return [{"variant": self.config.variant, "step": i + 1, "t": float(self.times[i]),
                 "M": float(self.m[i]), "M_stderr": float(self.m_stderr[i]),
                 "discard_rate": float(self.discard_rate[i])} for i in range(self.times.size)]


ISING_COLUMNS = ("variant", "step", "t", "M", "M_stderr", "discard_rate")


# ---------------------------------------------------------------- circuits

def _bonds(n: int) -> list[tuple[int, int]]:
    """Site i pairs with i+1 (periodic); for two sites the pair appears twice."""
    return [(i, (i + 1) % n) for i in range(n)]


def trotter_step(circuit: Circuit, cfg: IsingConfig) -> Circuit:
    """One physical step: per site, exp(-i delta Z_i Z_{i+1}) via CNOT-Rz-CNOT, then Rx on site i."""
    for i, j in _bonds(cfg.n_sites):
        circuit.gate(CNOT(i, j))
        circuit.gate(Rz(j, 2 * cfg.delta))
        circuit.gate(CNOT(i, j))
        circuit.gate(Rx(i, 2 * cfg.h * cfg.delta))
    return circuit


def trotter_circuit(cfg: IsingConfig) -> Circuit:
    """The bare physical circuit for ``cfg.n_trot`` steps on |0...0>."""
    if cfg.variant != "bare":
        return encoded_trotter(cfg)[0].circuit
    c = Circuit(cfg.n_sites, name="ising")
    for _ in range(cfg.n_trot):
        trotter_step(c, cfg)
    return c


def encoded_trotter(cfg: IsingConfig) -> tuple[LogicalRegister, list[int], list[list[tuple[int, ...]]]]:
    """Logical circuit with a marker after every step.

    Returns the register, the instruction count after each step and the
    data-block qubits after each step (teleported gates move blocks).
    """
    if cfg.variant == "bare":
        raise ValueError("use trotter_circuit for the bare variant")
    reg = LogicalRegister(2, postselect=cfg.postselect, ec_after_h=cfg.variant == "encoded_with_EC")
    bounds, layouts = [], []
    for _ in range(cfg.n_trot):
        for i, j in _bonds(2):
            reg.apply("CNOT_L", i, j)
            reg.apply("Rz_L", j, theta=2 * cfg.delta)
            reg.apply("CNOT_L", i, j)
            reg.apply("Rx_L", i, theta=2 * cfg.h * cfg.delta)
        bounds.append(len(reg.circuit))
        layouts.append([b.qubits for b in reg.blocks])
    return reg, bounds, layouts


# ---------------------------------------------------------------- dense oracle

_PAULI = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Z": np.diag([1.0, -1.0])}


def _op(n: int, letters: dict[int, str]) -> np.ndarray:
    """Kronecker product with qubit 0 as the least significant bit."""
    out = np.eye(1)
    for q in reversed(range(n)):
        out = np.kron(out, _PAULI[letters.get(q, "I")])
    return out


def ising_hamiltonian(n: int, h: float) -> np.ndarray:
    H = sum(_op(n, {i: "Z", j: "Z"}) if i != j else 0 for i, j in _bonds(n))
    return H + h * sum(_op(n, {i: "X"}) for i in range(n))


def dense_trotter_step(n: int, h: float, delta: float) -> np.ndarray:
    u = np.eye(1 << n, dtype=complex)
    for i, j in _bonds(n):
        u = expm(-1j * delta * _op(n, {i: "Z", j: "Z"})) @ u
        u = expm(-1j * h * delta * _op(n, {i: "X"})) @ u
    return u


def magnetization_operator(n: int) -> np.ndarray:
    return sum(_op(n, {i: "Z"}) for i in range(n))


def dense_magnetization(n: int, h: float, delta: float, n_trot: int) -> np.ndarray:
    """Noiseless Trotter magnetization after steps 1..n_trot, by dense matrix products."""
    u = dense_trotter_step(n, h, delta)
    mz = magnetization_operator(n)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    out = []
    for _ in range(n_trot):
        psi = u @ psi
        out.append(float(np.real(np.conj(psi) @ mz @ psi)))
    return np.array(out)


def exact_magnetization(n: int, h: float, times: Sequence[float]) -> np.ndarray:
    """Magnetization under exp(-iHt) by eigendecomposition."""
    w, v = np.linalg.eigh(ising_hamiltonian(n, h))
    mz = magnetization_operator(n)
    psi0 = np.zeros(1 << n)
    psi0[0] = 1.0
    c = v.T @ psi0
    out = []
    for t in times:
        psi = v @ (np.exp(-1j * w * t) * c)
        out.append(float(np.real(np.conj(psi) @ mz @ psi)))
    return np.array(out)


# ---------------------------------------------------------------- noisy series

def _z_sum(n_logical: int) -> np.ndarray:
    idx = np.arange(1 << n_logical)
    return sum(1 - 2 * ((idx >> k) & 1) for k in range(n_logical)).astype(float)


def run_ising(cfg: IsingConfig, seed: int) -> IsingSeries:
    """Exact accepted distributions after every step, then shot sampling at each step.

    Each time point gets ``cfg.shots`` accepted shots from its own stream; the
    raw count is drawn from the number of attempts needed to collect them.
    """
    noise = NoiseSpec(cfg.p, cfg.epsilon)
    n = cfg.n_sites
    if cfg.variant == "bare":
        circuit = trotter_circuit(cfg)
        per = len(circuit) // cfg.n_trot
        bounds = [per * (k + 1) for k in range(cfg.n_trot)]
        layouts = [[(q,) for q in range(n)]] * cfg.n_trot
    else:
        reg, bounds, layouts = encoded_trotter(cfg)
        circuit = reg.circuit
    eng = DensityEngine(circuit.n_qubits, noise)
    zsum = _z_sum(n)
    vid = VARIANTS.index(cfg.variant)
    exact_m, m, err, acc, raw = [], [], [], [], []
    start = 0
    for k, stop in enumerate(bounds):
        eng.run(slice_circuit(circuit, start, stop))
        start = stop
        a = eng.acceptance()
        dist = decoded_distribution(eng.diagonal(), layouts[k]) / a
        rng = rng_for(seed, vid, k)
        counts = sample_counts(dist, cfg.shots, rng)
        mean = counts @ zsum / cfg.shots
        var = counts @ (zsum - mean) ** 2 / max(cfg.shots - 1, 1)
        exact_m.append(float(dist @ zsum))
        m.append(float(mean))
        err.append(math.sqrt(var / cfg.shots))
        acc.append(a)
        raw.append(sample_raw_shots(cfg.shots, min(a, 1.0), rng))
    times = cfg.delta * np.arange(1, cfg.n_trot + 1)
    return IsingSeries(cfg, times, np.array(exact_m), np.array(m), np.array(err),
                       np.array(acc), np.array(raw))


def integrated_error(noiseless: Sequence[float], noisy: Sequence[float]) -> float:
    """Mean absolute deviation between two magnetization series of equal length."""
    a, b = np.asarray(noiseless, dtype=float), np.asarray(noisy, dtype=float)
    if a.shape != b.shape:
        raise ValueError("series lengths differ")
    if a.size == 0:
        raise ValueError("empty series")
    return float(np.mean(np.abs(a - b)))


def integrated_error_curve(noiseless: Sequence[float], noisy: Sequence[float]) -> np.ndarray:
    """Integrated error E(N) for every prefix length N."""
    dev = np.abs(np.asarray(noiseless, dtype=float) - np.asarray(noisy, dtype=float))
    return np.cumsum(dev) / np.arange(1, dev.size + 1)


def discard_rate_fit(times: Sequence[float], fractions: Sequence[float]) -> FitResult:
    """Least-squares fit of 1 - exp(-a t)."""
    t, f = np.asarray(times, dtype=float), np.asarray(fractions, dtype=float)
    if t.shape != f.shape or t.size == 0:
        raise ValueError("times and fractions must be non-empty and of equal length")
    if np.any(f < 0) or np.any(f > 1):
        raise ValueError("discard fractions must lie in [0, 1]")
    if not np.any(f > 0):
        raise ValueError("cannot fit an all-zero discard series")

    def model(x, a):
        return 1.0 - np.exp(-a * x)

    guess = -math.log(max(1e-12, 1 - float(f[-1]))) / float(t[-1]) if f[-1] < 1 else 1.0
    (a,), _ = curve_fit(model, t, f, p0=[max(guess, 1e-6)], bounds=(0.0, np.inf))
    res = float(np.sum((model(t, a) - f) ** 2))
    return FitResult(float(a), res)
