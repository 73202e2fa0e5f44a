"""Circuit representation shared by every simulator.

A :class:`Circuit` is a flat list of instructions over a fixed register.
Classical control is expressed with :class:`Condition`, a truth table over a
handful of measurement keys, so the same circuit runs unchanged on the exact
density-matrix engine (records are per branch) and on the batched trajectory
engine (records are per shot).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .gates import Gate


@dataclass(frozen=True)
class Condition:
    """Boolean function of measured bits, stored as a truth table.

    ``table[i]`` is the value when ``record[keys[k]] == (i >> k) & 1`` for all k.
    """

    keys: tuple[str, ...]
    table: tuple[bool, ...]

    def __post_init__(self):
        if len(self.table) != 1 << len(self.keys):
            raise ValueError("truth table size must be 2**len(keys)")

    @classmethod
    def from_function(cls, keys: Sequence[str], fn: Callable[..., bool]) -> "Condition":
        table = []
        for i in range(1 << len(keys)):
            bits = [(i >> k) & 1 for k in range(len(keys))]
            table.append(bool(fn(*bits)))
        return cls(tuple(keys), tuple(table))

    def index(self, record: dict) -> np.ndarray:
        idx = 0
        for k, key in enumerate(self.keys):
            idx = idx + (np.asarray(record[key], dtype=np.int64) << k)
        return np.asarray(idx)

    def evaluate(self, record: dict) -> np.ndarray:
        return np.asarray(self.table, dtype=bool)[self.index(record)]


@dataclass(frozen=True)
class Op:
    """A noisy unitary gate."""
    gate: Gate


@dataclass(frozen=True)
class Cond:
    """A gate executed only when ``condition`` holds; noisy when executed."""
    gate: Gate
    condition: Condition


@dataclass(frozen=True)
class Reset:
    """Prepare |0> (noiseless unless the noise spec enables preparation flips)."""
    qubit: int


@dataclass(frozen=True)
class Measure:
    """Noiseless Z measurement storing 0/1 under ``key``."""
    qubit: int
    key: str


@dataclass(frozen=True)
class Postselect:
    """Keep the run only when ``condition`` holds."""
    condition: Condition
    label: str = ""


Instruction = Union[Op, Cond, Reset, Measure, Postselect]


def gate_of(ins: Instruction) -> Optional[Gate]:
    return ins.gate if isinstance(ins, (Op, Cond)) else None


@dataclass
class Circuit:
    n_qubits: int
    instructions: list = field(default_factory=list)
    name: str = ""

    _counter: Iterator[int] = field(default_factory=itertools.count, repr=False, compare=False)

    def fresh_key(self, stem: str = "m") -> str:
        return f"{stem}#{next(self._counter)}"

    def _check(self, qubits: Iterable[int]) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} outside register of {self.n_qubits}")

    def gate(self, g: Gate) -> "Circuit":
        self._check(g.qubits)
        self.instructions.append(Op(g))
        return self

    def gates(self, gs: Iterable[Gate]) -> "Circuit":
        for g in gs:
            self.gate(g)
        return self

    def cond(self, g: Gate, condition: Condition) -> "Circuit":
        self._check(g.qubits)
        self.instructions.append(Cond(g, condition))
        return self

    def reset(self, *qubits: int) -> "Circuit":
        self._check(qubits)
        for q in qubits:
            self.instructions.append(Reset(q))
        return self

    def measure(self, qubit: int, stem: str = "m") -> str:
        self._check((qubit,))
        key = self.fresh_key(stem)
        self.instructions.append(Measure(qubit, key))
        return key

    def postselect(self, condition: Condition, label: str = "") -> "Circuit":
        self.instructions.append(Postselect(condition, label))
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits > self.n_qubits:
            raise ValueError("cannot append a wider circuit")
        self.instructions.extend(other.instructions)
        return self

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def measurement_keys(self) -> list[str]:
        return [ins.key for ins in self.instructions if isinstance(ins, Measure)]

    def gate_count(self) -> tuple[int, int]:
        """(single-qubit gates, two-qubit gates), conditional gates included."""
        one = two = 0
        for ins in self.instructions:
            g = gate_of(ins)
            if g is None:
                continue
            if g.is_two_qubit:
                two += 1
            else:
                one += 1
        return one, two

    def is_classical(self) -> bool:
        """True when every gate maps basis states to basis states (up to phase)."""
        ok = {"X", "Y", "Z", "S", "Sdg", "CNOT", "CZ", "Rz"}
        return all(g.kind in ok for g in map(gate_of, self.instructions) if g is not None)

    def last_use(self) -> dict[str, int]:
        """Index of the last instruction reading each measurement key."""
        out: dict[str, int] = {}
        for i, ins in enumerate(self.instructions):
            if isinstance(ins, (Cond, Postselect)):
                for k in ins.condition.keys:
                    out[k] = i
        return out
