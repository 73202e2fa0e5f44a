"""Gate definitions.

Qubit ordering is little-endian everywhere in this package: qubit ``q``
corresponds to bit ``q`` of a basis-state index, so qubit 0 is the least
significant bit. ``|q1 q0> = |01>`` is index 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

ONE_QUBIT = ("X", "Y", "Z", "H", "S", "Sdg", "Rz", "Ry", "Rx")
TWO_QUBIT = ("CNOT", "CZ")
ROTATIONS = ("Rz", "Ry", "Rx")
CLIFFORD = ("X", "Y", "Z", "H", "S", "Sdg", "CNOT", "CZ")

_R2 = 1 / math.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_R2, _R2], [_R2, -_R2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind in ONE_QUBIT:
            arity = 1
        elif self.kind in TWO_QUBIT:
            arity = 2
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} needs two distinct qubits")
        if (self.kind in ROTATIONS) != (self.theta is not None):
            raise ValueError(f"{self.kind}: angle given iff gate is a rotation")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD

    def matrix(self) -> np.ndarray:
        """Unitary on the gate's own qubits, little-endian in ``self.qubits``.

        For two-qubit gates ``qubits[0]`` is bit 0 of the 4x4 matrix.
        """
        return gate_matrix(self.kind, self.theta)

    def __str__(self) -> str:
        args = ",".join(map(str, self.qubits))
        if self.theta is not None:
            return f"{self.kind}({self.theta:.6g})[{args}]"
        return f"{self.kind}[{args}]"


def gate_matrix(kind: str, theta: Optional[float] = None) -> np.ndarray:
    if kind in _FIXED:
        return _FIXED[kind].copy()
    if kind == "Rz":
        return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]])
    if kind == "CNOT":
        # control = bit 0, target = bit 1
        m = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            j = i ^ 2 if i & 1 else i
            m[j, i] = 1
        return m
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind in ("Rx", "Ry"):
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        if kind == "Rx":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        return np.array([[c, -s], [s, c]], dtype=complex)
    raise ValueError(f"unknown gate kind {kind!r}")


def X(q): return Gate("X", (q,))
def Y(q): return Gate("Y", (q,))
def Z(q): return Gate("Z", (q,))
def H(q): return Gate("H", (q,))
def S(q): return Gate("S", (q,))
def Sdg(q): return Gate("Sdg", (q,))
def Rz(q, theta): return Gate("Rz", (q,), float(theta))
def Ry(q, theta): return Gate("Ry", (q,), float(theta))
def Rx(q, theta): return Gate("Rx", (q,), float(theta))
def CNOT(c, t): return Gate("CNOT", (c, t))
def CZ(a, b): return Gate("CZ", (a, b))
