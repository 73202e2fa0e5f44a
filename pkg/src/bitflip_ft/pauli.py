"""Signed Pauli strings over indexed qubits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

_PHASES = (1, 1j, -1, -1j)

# single-qubit products: (a, b) -> (power of i, letter) with a*b = i**k * letter
_MUL = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _phase_index(phase: complex) -> int:
    for k, ph in enumerate(_PHASES):
        if abs(phase - ph) < 1e-12:
            return k
    raise ValueError(f"phase must be one of +1, -1, +i, -i, got {phase!r}")


@dataclass(frozen=True)
class PauliString:
    """A phase in {+1, -1, +i, -i} times a tensor product of Paulis.

    ``letters`` maps qubit index to one of ``"X"``, ``"Y"``, ``"Z"``; qubits
    absent from the map carry the identity.
    """

    letters: Mapping[int, str] = field(default_factory=dict)
    phase: complex = 1

    def __post_init__(self):
        clean = {}
        for q, s in dict(self.letters).items():
            if s not in "IXYZ" or len(s) != 1:
                raise ValueError(f"bad Pauli letter {s!r}")
            if q < 0:
                raise ValueError("qubit index must be non-negative")
            if s != "I":
                clean[int(q)] = s
        object.__setattr__(self, "letters", dict(sorted(clean.items())))
        object.__setattr__(self, "phase", _PHASES[_phase_index(complex(self.phase))])

    @classmethod
    def single(cls, letter: str, qubit: int, phase: complex = 1) -> "PauliString":
        return cls({qubit: letter}, phase)

    @classmethod
    def from_label(cls, label: str, phase: complex = 1) -> "PauliString":
        """Build from a label such as ``"X0 Z1"`` (whitespace separated)."""
        letters = {}
        for tok in label.split():
            letters[int(tok[1:])] = tok[0]
        return cls(letters, phase)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.letters)

    @property
    def weight(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def __mul__(self, other: "PauliString") -> "PauliString":
        k = _phase_index(self.phase) + _phase_index(other.phase)
        out = dict(self.letters)
        for q, b in other.letters.items():
            a = out.get(q, "I")
            dk, c = _MUL[(a, b)]
            k += dk
            out[q] = c
        return PauliString(out, _PHASES[k % 4])

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.phase)

    def commutes_with(self, other: "PauliString") -> bool:
        anti = sum(
            1 for q, a in self.letters.items()
            if q in other.letters and other.letters[q] != a
        )
        return anti % 2 == 0

    def matrix(self, n_qubits: int) -> np.ndarray:
        """Dense matrix in the little-endian convention (qubit 0 = least significant bit)."""
        if self.letters and max(self.letters) >= n_qubits:
            raise IndexError("Pauli acts outside the register")
        out = np.array([[1.0 + 0j]])
        for q in reversed(range(n_qubits)):
            out = np.kron(out, MATRICES[self.letters.get(q, "I")])
        return self.phase * out

    def label(self) -> str:
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        body = " ".join(f"{s}{q}" for q, s in self.letters.items()) or "I"
        return f"{sign}{body}"

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"


def conjugate_clifford(pauli: PauliString, gate: str, qubits: tuple[int, ...]) -> PauliString:
    """Return ``G P G^dagger`` for a Clifford gate ``G``.

    Used to propagate Pauli faults through X, Y, Z, H, S, Sdg, CNOT and CZ.
    """
    if gate in ("X", "Y", "Z"):
        g = PauliString.single(gate, qubits[0])
        return pauli if g.commutes_with(pauli) else -pauli
    if gate in ("H", "S", "Sdg"):
        q = qubits[0]
        s = pauli.letters.get(q, "I")
        if s == "I":
            return pauli
        table = {
            "H": {"X": (1, "Z"), "Y": (-1, "Y"), "Z": (1, "X")},
            "S": {"X": (1, "Y"), "Y": (-1, "X"), "Z": (1, "Z")},
            "Sdg": {"X": (-1, "Y"), "Y": (1, "X"), "Z": (1, "Z")},
        }[gate]
        sign, new = table[s]
        letters = dict(pauli.letters)
        letters[q] = new
        return PauliString(letters, sign * pauli.phase)
    if gate in ("CNOT", "CZ"):
        c, t = qubits
        # images of single-qubit generators on (c, t)
        if gate == "CNOT":
            images = {
                (c, "X"): PauliString({c: "X", t: "X"}),
                (c, "Z"): PauliString({c: "Z"}),
                (t, "X"): PauliString({t: "X"}),
                (t, "Z"): PauliString({c: "Z", t: "Z"}),
            }
        else:
            images = {
                (c, "X"): PauliString({c: "X", t: "Z"}),
                (c, "Z"): PauliString({c: "Z"}),
                (t, "X"): PauliString({t: "X", c: "Z"}),
                (t, "Z"): PauliString({t: "Z"}),
            }
        rest = {q: s for q, s in pauli.letters.items() if q not in (c, t)}
        out = PauliString(rest, pauli.phase)
        for q in (c, t):
            s = pauli.letters.get(q, "I")
            if s == "X":
                out = out * images[(q, "X")]
            elif s == "Z":
                out = out * images[(q, "Z")]
            elif s == "Y":
                # Y = i X Z
                out = out * PauliString({}, 1j) * images[(q, "X")] * images[(q, "Z")]
        return out
    raise ValueError(f"{gate} is not a supported Clifford gate")
