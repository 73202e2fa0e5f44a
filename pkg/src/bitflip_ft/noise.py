"""Biased Pauli noise channels and fault sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .pauli import PauliString

TWO_QUBIT_RULE = "product"  # two-qubit channel = single-qubit channel on each wire


@dataclass(frozen=True)
class NoiseSpec:
    """Gate noise with flip probability ``p`` and bias leak ``epsilon``.

    A fault follows every one- and two-qubit gate. Preparation, measurement
    and idling are noiseless unless ``noisy_prep`` is set, in which case a
    reset yields |1> with probability ``p``. ``gate_noise=False`` switches the
    gate faults off, leaving preparation flips as the only noise.
    """

    p: float = 0.0
    epsilon: float = 0.0
    noisy_prep: bool = False
    gate_noise: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def weights(self) -> tuple[float, float, float, float]:
        """Probabilities of (I, X, Y, Z) after a single-qubit gate."""
        p, e = self.p, self.epsilon
        return (1 - p, p * (1 - e), p * e / 2, p * e / 2)

    @property
    def gates_noisy(self) -> bool:
        return self.gate_noise and self.p > 0

    @property
    def is_noiseless(self) -> bool:
        return self.p == 0 or not (self.gate_noise or self.noisy_prep)

    def label(self) -> str:
        out = f"p={self.p:g},epsilon={self.epsilon:g}"
        if self.epsilon > 0:
            out += f",two_qubit={TWO_QUBIT_RULE}"
        if self.noisy_prep:
            out += ",noisy_prep"
        if not self.gate_noise:
            out += ",no_gate_noise"
        return out


NOISELESS = NoiseSpec()


@dataclass(frozen=True)
class FaultEvent:
    site: int
    pauli: PauliString


def single_qubit_kraus(spec: NoiseSpec, qubit: int = 0) -> list[tuple[float, PauliString]]:
    """Pauli channel as (weight, Pauli) pairs; zero-weight terms are dropped."""
    out = []
    for w, s in zip(spec.weights, "IXYZ"):
        if w > 0:
            out.append((w, PauliString({qubit: s})))
    return out


def two_qubit_kraus(spec: NoiseSpec, qubits: tuple[int, int] = (0, 1)) -> list[tuple[float, PauliString]]:
    """The two-qubit bit-flip channel: independent flips on both wires."""
    if spec.epsilon != 0:
        raise ValueError("the two-qubit Kraus list is defined for epsilon = 0; "
                         "for epsilon > 0 the engines apply the single-qubit channel per wire")
    a, b = qubits
    p = spec.p
    terms = [
        ((1 - p) ** 2, PauliString()),
        ((1 - p) * p, PauliString({a: "X"})),
        ((1 - p) * p, PauliString({b: "X"})),
        (p * p, PauliString({a: "X", b: "X"})),
    ]
    return [(w, P) for w, P in terms if w > 0]


def sample_pauli(spec: NoiseSpec, draw: float) -> str:
    """Letter drawn from the single-qubit channel by inverse CDF on ``draw``."""
    acc = 0.0
    for w, s in zip(spec.weights, "IXYZ"):
        acc += w
        if draw < acc:
            return s
    return "I"


def sample_fault(spec: NoiseSpec, site: int, qubits: tuple[int, ...],
                 draws: tuple[float, ...]) -> Optional[FaultEvent]:
    """Fault after the gate on ``qubits``; one uniform draw per wire.

    Returns ``None`` when every wire draws the identity.
    """
    if len(draws) != len(qubits):
        raise ValueError("need one draw per gate qubit")
    letters = {q: sample_pauli(spec, d) for q, d in zip(qubits, draws)}
    letters = {q: s for q, s in letters.items() if s != "I"}
    if not letters:
        return None
    return FaultEvent(site, PauliString(letters))
