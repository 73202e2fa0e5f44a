"""Pure and mixed states with the basic operations the engines build on."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .gates import Gate
from .pauli import PauliString

NORM_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise ValueError(f"need {1 << self.n_qubits} amplitudes, got {amps.size}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1
        return cls(n_qubits, amps)

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        """``"01"`` means qubit 0 in |0>, qubit 1 in |1>, i.e. written qubit 0 first."""
        index = sum(int(b) << q for q, b in enumerate(bits))
        return cls.basis(len(bits), index)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.n_qubits, np.outer(a, a.conj()))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        dim = 1 << self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"need a {dim}x{dim} matrix, got {m.shape}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityMatrix":
        return StateVector.zero(n_qubits).density()

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def is_valid(self, tol: float = 1e-9) -> bool:
        m = self.entries
        if np.abs(m - m.conj().T).max() > 1e-10:
            return False
        if abs(self.trace() - 1) > 1e-10:
            return False
        return np.linalg.eigvalsh(m).min() > -tol

    def partial_trace(self, keep: list[int]) -> "DensityMatrix":
        """Reduced state on ``keep`` (returned in the order given, first = new qubit 0)."""
        n = self.n_qubits
        t = self.entries.reshape((2,) * (2 * n))
        # tensor axis of qubit q is n-1-q for rows, 2n-1-q for columns
        drop = [q for q in range(n) if q not in keep]
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        row = [letters[i] for i in range(n)]
        col = [letters[n + i] for i in range(n)]
        for q in drop:
            col[n - 1 - q] = row[n - 1 - q]
        out_rows = [row[n - 1 - q] for q in reversed(keep)]
        out_cols = [col[n - 1 - q] for q in reversed(keep)]
        spec = "".join(row + col) + "->" + "".join(out_rows + out_cols)
        k = len(keep)
        return DensityMatrix(k, np.einsum(spec, t).reshape(1 << k, 1 << k))


def _check_qubits(n: int, qubits) -> None:
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_qubits(state.n_qubits, gate.qubits)
    v = K.apply_gate(state.amplitudes[None, :], gate.kind, gate.qubits, gate.theta)
    return StateVector(state.n_qubits, v[0])


def apply_gate_density(rho: DensityMatrix, gate: Gate) -> DensityMatrix:
    n = rho.n_qubits
    _check_qubits(n, gate.qubits)
    v = rho.entries.reshape(1, -1)
    v = K.apply_gate(v, gate.kind, gate.qubits, gate.theta, shift=n)
    v = K.apply_gate(v, gate.kind, gate.qubits, gate.theta, conj=True)
    return DensityMatrix(n, v.reshape(rho.entries.shape))


def apply_pauli(state: StateVector, pauli: PauliString) -> StateVector:
    _check_qubits(state.n_qubits, pauli.support)
    v = state.amplitudes[None, :]
    for q, s in pauli.letters.items():
        v = K.apply_gate(v, s, (q,))
    return StateVector(state.n_qubits, pauli.phase * v[0])


def measure_z(state: StateVector, qubit: int, random_draw: float) -> tuple[int, StateVector]:
    """Projective Z measurement: outcome 0 iff ``random_draw < P(0)``."""
    _check_qubits(state.n_qubits, (qubit,))
    v = state.amplitudes[None, :]
    p1 = float(K.prob_one(v, qubit)[0])
    p0 = 1.0 - p1
    bit = 0 if random_draw < p0 else 1
    w = K.project(v, qubit, np.array([bit]))[0]
    return bit, StateVector(state.n_qubits, w / np.linalg.norm(w))


def expectation_pauli(state: StateVector, obs: PauliString) -> float:
    if obs.phase not in (1, -1):
        raise ValueError("observable must carry a real phase (+1 or -1)")
    val = np.vdot(state.amplitudes, apply_pauli(state, obs).amplitudes)
    return float(val.real)


def squared_overlap(state: StateVector, reference: StateVector) -> float:
    if state.n_qubits != reference.n_qubits:
        raise ValueError("qubit counts differ")
    return float(abs(np.vdot(reference.amplitudes, state.amplitudes)) ** 2)


def fidelity_pure(rho: DensityMatrix, psi: StateVector) -> float:
    """<psi|rho|psi> for a pure reference."""
    a = psi.amplitudes
    return float(np.vdot(a, rho.entries @ a).real)
