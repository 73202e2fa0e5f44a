"""The bit-flip repetition code: encoding, syndrome extraction, decoding and EC."""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circuit import Circuit, Condition
from .gates import CNOT, X, Ry, Rz
from .pauli import PauliString
from .states import StateVector


@dataclass(frozen=True)
class CodeBlock:
    qubits: tuple[int, ...]

    def __post_init__(self):
        qs = tuple(int(q) for q in self.qubits)
        if len(set(qs)) != len(qs):
            raise ValueError(f"block qubits must be distinct: {qs}")
        if len(qs) % 2 == 0:
            raise ValueError("block length must be odd")
        object.__setattr__(self, "qubits", qs)

    def __iter__(self):
        return iter(self.qubits)

    def __getitem__(self, j: int) -> int:
        return self.qubits[j]

    def __len__(self) -> int:
        return len(self.qubits)

    def overlaps(self, other: "CodeBlock") -> bool:
        return bool(set(self.qubits) & set(other.qubits))


@dataclass(frozen=True)
class Syndrome:
    """Eigenvalues (+1/-1) of Z1Z2 and Z2Z3."""
    z1z2: int
    z2z3: int

    def __post_init__(self):
        if self.z1z2 not in (1, -1) or self.z2z3 not in (1, -1):
            raise ValueError("syndrome values must be +1 or -1")

    @classmethod
    def from_bits(cls, a: int, b: int) -> "Syndrome":
        return cls(1 - 2 * int(a), 1 - 2 * int(b))

    @property
    def bits(self) -> tuple[int, int]:
        return ((1 - self.z1z2) // 2, (1 - self.z2z3) // 2)

    @property
    def trivial(self) -> bool:
        return self.z1z2 == 1 and self.z2z3 == 1

    def __iter__(self):
        return iter((self.z1z2, self.z2z3))


# feedback is the index of the flipped physical qubit (0, 1, 2) or None
SINGLE_ROUND_TABLE: dict[tuple[int, int], Optional[int]] = {
    (1, 1): None,
    (-1, 1): 0,
    (-1, -1): 1,
    (1, -1): 2,
}

# (location, round-0 syndrome, round-1 syndrome, feedback) for single faults
DOUBLE_ROUND_ROWS: tuple[tuple[int, tuple[int, int], tuple[int, int], Optional[int]], ...] = (
    (1, (-1, 1), (-1, 1), 0),
    (2, (-1, -1), (-1, -1), 1),
    (3, (1, -1), (1, -1), 2),
    (4, (1, 1), (-1, 1), 0),
    (5, (1, -1), (-1, -1), 1),
    (6, (1, 1), (-1, -1), 1),
    (7, (1, 1), (1, -1), None),
    (8, (-1, 1), (1, 1), None),
    (9, (-1, 1), (1, 1), None),
    (10, (1, -1), (1, 1), None),
    (11, (1, -1), (1, 1), None),
    (12, (1, 1), (1, 1), None),
    (13, (1, 1), (1, -1), None),
    (14, (1, 1), (1, 1), None),
    (15, (1, 1), (1, 1), None),
    (16, (1, 1), (-1, 1), 0),
    (17, (1, 1), (-1, 1), 0),
    (18, (1, 1), (1, -1), None),
    (19, (1, 1), (1, -1), None),
)

# single-round syndromes observed for faults at locations 1..11
SINGLE_ROUND_ROWS: tuple[tuple[int, tuple[int, int]], ...] = (
    (1, (-1, 1)), (2, (-1, -1)), (3, (1, -1)), (4, (1, 1)), (5, (1, -1)), (6, (1, 1)),
    (7, (1, 1)), (8, (-1, 1)), (9, (-1, 1)), (10, (1, -1)), (11, (1, -1)),
)


def _double_map() -> dict:
    out: dict = {}
    for _, s0, s1, fb in DOUBLE_ROUND_ROWS:
        if out.setdefault((s0, s1), fb) != fb:
            raise AssertionError(f"inconsistent double-round rows for {(s0, s1)}")
    return out


DOUBLE_ROUND_TABLE = _double_map()


def _feedback_pauli(index: Optional[int]) -> PauliString:
    return PauliString() if index is None else PauliString({index: "X"})


def decode_single(s: Syndrome) -> PauliString:
    """Lookup-table feedback; qubit indices are positions 0, 1, 2 within the block."""
    return _feedback_pauli(SINGLE_ROUND_TABLE[tuple(s)])


def decode_double(s0: Syndrome, s1: Syndrome) -> PauliString:
    """Two-round feedback; histories outside the single-fault table give the identity."""
    return _feedback_pauli(DOUBLE_ROUND_TABLE.get((tuple(s0), tuple(s1))))


def majority_vote(values: Sequence):
    """Value occurring at least twice among three, or ``None`` if all differ."""
    if len(values) != 3:
        raise ValueError("majority vote needs exactly three values")
    value, count = Counter(values).most_common(1)[0]
    return value if count >= 2 else None


def decode_triple(s0: Syndrome, s1: Syndrome, s2: Syndrome) -> PauliString:
    """Majority over whole syndrome pairs, then the single-round table.

    If all three pairs differ no feedback is applied.
    """
    winner = majority_vote([tuple(s0), tuple(s1), tuple(s2)])
    if winner is None:
        return PauliString()
    return decode_single(Syndrome(*winner))


def logical_error_rate(d: int, p: float) -> float:
    """Failure probability of bounded-distance decoding of a distance-``d`` repetition code."""
    if d < 1 or d % 2 == 0:
        raise ValueError("distance must be odd and positive")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    t = (d - 1) // 2
    ok = sum(math.comb(d, k) * p ** k * (1 - p) ** (d - k) for k in range(t + 1))
    return 1.0 - ok


# ------------------------------------------------------------------ circuits

def encode(circuit: Circuit, block: CodeBlock, amplitudes: tuple[complex, complex]) -> Circuit:
    """Prepare ``a|000> + b|111>`` (up to global phase) from fresh |0> qubits."""
    a, b = amplitudes
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-10:
        raise ValueError("amplitudes must be normalised")
    theta = 2 * math.atan2(abs(b), abs(a))
    lam = np.angle(b) - np.angle(a) if abs(a) > 0 and abs(b) > 0 else 0.0
    q0 = block[0]
    if theta != 0:
        circuit.gate(Ry(q0, theta))
    if lam != 0:
        circuit.gate(Rz(q0, lam))
    for q in block.qubits[1:]:
        circuit.gate(CNOT(q0, q))
    return circuit


def encoded_state(n_qubits: int, blocks: Sequence[CodeBlock], logical: np.ndarray) -> StateVector:
    """Embed a logical state (little-endian over ``blocks``) as codewords; other qubits |0>."""
    logical = np.asarray(logical, dtype=complex).reshape(-1)
    if logical.size != 1 << len(blocks):
        raise ValueError("logical state size does not match the number of blocks")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    for idx, a in enumerate(logical):
        phys = 0
        for k, blk in enumerate(blocks):
            if (idx >> k) & 1:
                for q in blk:
                    phys |= 1 << q
        amps[phys] += a
    return StateVector(n_qubits, amps)


def _check_ancilla(block: CodeBlock, ancilla: int) -> None:
    if ancilla in block.qubits:
        raise ValueError(f"ancilla {ancilla} collides with block {block.qubits}")


def measure_stabilizer(circuit: Circuit, i: int, j: int, ancilla: int, stem: str = "s") -> str:
    """Parity Z_i Z_j onto a fresh ancilla, then measure and reset it."""
    circuit.gate(CNOT(i, ancilla))
    circuit.gate(CNOT(j, ancilla))
    key = circuit.measure(ancilla, stem)
    circuit.reset(ancilla)
    return key


def syndrome_round(circuit: Circuit, block: CodeBlock, ancilla: int) -> tuple[str, str]:
    """One round of Z1Z2 then Z2Z3 with a single recycled ancilla; returns the two keys."""
    _check_ancilla(block, ancilla)
    q1, q2, q3 = block.qubits
    return (measure_stabilizer(circuit, q1, q2, ancilla, "z12"),
            measure_stabilizer(circuit, q2, q3, ancilla, "z23"))


def _feedback(circuit: Circuit, block: CodeBlock, keys: Sequence[str], decoder) -> None:
    n_pairs = len(keys) // 2
    for j in range(3):
        def fires(*bits, j=j):
            pairs = [Syndrome.from_bits(bits[2 * r], bits[2 * r + 1]) for r in range(n_pairs)]
            fb = decoder(*pairs)
            return fb.letters.get(j) == "X"
        cond = Condition.from_function(keys, fires)
        if any(cond.table):
            circuit.cond(X(block[j]), cond)


def error_correct(circuit: Circuit, block: CodeBlock, ancilla: int, rounds: int = 2) -> list[str]:
    """Repeated syndrome extraction followed by classically controlled X feedback.

    ``rounds=2`` uses the two-round lookup table; ``rounds=3`` takes a majority over
    the three syndrome pairs. Returns the measurement keys in order.
    """
    if rounds not in (1, 2, 3):
        raise ValueError("rounds must be 1, 2 or 3")
    keys: list[str] = []
    for _ in range(rounds):
        keys.extend(syndrome_round(circuit, block, ancilla))
    decoder = {1: decode_single, 2: decode_double, 3: decode_triple}[rounds]
    _feedback(circuit, block, keys, decoder)
    return keys


def detect_round(circuit: Circuit, block: CodeBlock, ancilla: int, label: str = "") -> tuple[str, str]:
    """One syndrome round followed by postselection on the trivial syndrome."""
    keys = syndrome_round(circuit, block, ancilla)
    circuit.postselect(Condition(keys, (True, False, False, False)), label or "syndrome")
    return keys


def zero_factory(circuit: Circuit, batch: CodeBlock, ancilla: int) -> int:
    """One attempt of the |0> factory: prepare three qubits, check Z1Z2 and Z2Z3 once each.

    The attempt is postselected on both checks passing. The middle qubit is
    returned as the output: a preparation flip on it trips both checks.
    """
    _check_ancilla(batch, ancilla)
    circuit.reset(*batch.qubits)
    circuit.reset(ancilla)
    detect_round(circuit, batch, ancilla, "factory")
    return batch[1]


FACTORY_QUBITS = 4


def factory_circuit() -> tuple[Circuit, int]:
    """A single factory attempt on qubits 0-2 with ancilla 3; returns (circuit, output qubit)."""
    c = Circuit(FACTORY_QUBITS, name="zero_factory")
    out = zero_factory(c, CodeBlock((0, 1, 2)), 3)
    return c, out


def factory_residual(noise) -> tuple[float, float]:
    """Exact (acceptance, P(output = 1 | accepted)) of one factory attempt."""
    from .engines import DensityEngine
    c, out = factory_circuit()
    eng = DensityEngine(FACTORY_QUBITS, noise).run(c, strict=False)
    acc = eng.acceptance()
    diag = eng.diagonal()
    ones = diag[(np.arange(diag.size) >> out) & 1 == 1].sum()
    return acc, float(ones / acc)


def factory_residual_enumerated(p: float) -> tuple[float, float]:
    """Same quantity by summing over preparation-flip patterns, checks noiseless.

    Flips: three batch qubits and the ancilla before each of the two checks.
    """
    acc = bad = 0.0
    for f1, f2, f3, a0, a1 in itertools.product((0, 1), repeat=5):
        k = f1 + f2 + f3 + a0 + a1
        w = p ** k * (1 - p) ** (5 - k)
        if (f1 ^ f2 ^ a0) == 0 and (f2 ^ f3 ^ a1) == 0:
            acc += w
            bad += w * f2
    return acc, bad / acc


def run_zero_factory(noise, shots: int, rng: np.random.Generator,
                     max_attempts: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Repeat-until-success factory runs; returns (output bits, attempts used) per shot."""
    from .engines import BitEngine
    c, out = factory_circuit()
    bits = np.zeros(shots, dtype=np.uint8)
    attempts = np.zeros(shots, dtype=np.int64)
    pending = np.arange(shots)
    for _ in range(max_attempts):
        if pending.size == 0:
            break
        attempts[pending] += 1
        eng = BitEngine(FACTORY_QUBITS, pending.size, noise, rng)
        eng.shot_ids = pending
        eng.run(c)
        done = eng.shot_ids
        bits[done] = eng.bits[:, out]
        pending = np.setdiff1d(pending, done, assume_unique=True)
    if pending.size:
        raise RuntimeError(f"{pending.size} shots did not succeed within {max_attempts} attempts")
    return bits, attempts


# ------------------------------------------------------------------ tables

def tables_csv() -> str:
    """Single-round and double-round decoding tables as CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "location", "z1z2_r0", "z2z3_r0", "z1z2_r1", "z2z3_r1", "feedback"])
    for (a, b), fb in SINGLE_ROUND_TABLE.items():
        w.writerow(["single", "", a, b, "", "", "I" if fb is None else f"X{fb + 1}"])
    for loc, s0, s1, fb in DOUBLE_ROUND_ROWS:
        w.writerow(["double", loc, s0[0], s0[1], s1[0], s1[1], "I" if fb is None else f"X{fb + 1}"])
    return buf.getvalue()
