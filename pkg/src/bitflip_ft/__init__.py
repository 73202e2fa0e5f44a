"""Simulation and verification of bias-preserving gates on the bit-flip repetition code."""

from __future__ import annotations

from .circuit import Circuit, Condition
from .engines import BitEngine, DensityEngine, TrajectoryEngine
from .noise import NOISELESS, NoiseSpec
from .pauli import PauliString
from .repcode import CodeBlock, Syndrome, decode_double, decode_single, logical_error_rate

__all__ = [
    "BitEngine", "Circuit", "CodeBlock", "Condition", "DensityEngine", "NOISELESS", "NoiseSpec",
    "PauliString", "Syndrome", "TrajectoryEngine", "decode_double", "decode_single",
    "logical_error_rate",
]
