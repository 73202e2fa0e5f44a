"""Trajectory sampling against exact density-matrix evolution on gadget circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit
from ..engines import DensityEngine, TrajectoryEngine
from ..gadgets import DEFAULT_POSTSELECT, build_gadget, prep_plus
from ..gates import H
from ..noise import NoiseSpec
from ..repcode import CodeBlock
from .common import rng_for

CROSSCHECK_GADGETS = ("prep_plus_i", "CZ_L")


@dataclass(frozen=True)
class CrossCheck:
    name: str
    shots: int
    accepted: int
    acceptance: float  # exact
    acceptance_z: float
    max_outcome_z: float  # largest |deviation| / sigma over basis outcomes

    def within(self, n_sigma: float = 5.0) -> bool:
        return abs(self.acceptance_z) <= n_sigma and self.max_outcome_z <= n_sigma


def crosscheck_circuit(name: str, postselect: str = DEFAULT_POSTSELECT) -> Circuit:
    """The gadget with nontrivial logical input, then H on every data qubit to expose phases."""
    if name not in CROSSCHECK_GADGETS:
        raise ValueError(f"no cross-check circuit for {name!r}")
    gadget, _, _ = build_gadget(name, postselect=postselect)
    c = Circuit(gadget.n_qubits, name=f"crosscheck-{name}")
    data = [0, 1, 2]
    if name == "CZ_L":
        prep_plus(c, CodeBlock((0, 1, 2)))
        prep_plus(c, CodeBlock((3, 4, 5)))
        data += [3, 4, 5]
    c.extend(gadget)
    for q in data:
        c.gate(H(q))
    return c


def _binomial_z(k: int, n: int, p: float) -> float:
    sd = math.sqrt(n * p * (1 - p))
    if sd == 0:
        return 0.0 if k == n * p else math.inf
    return (k - n * p) / sd


def cross_check(name: str, p: float, shots: int, seed: int) -> CrossCheck:
    c = crosscheck_circuit(name)
    noise = NoiseSpec(p)
    dm = DensityEngine(c.n_qubits, noise).run(c)
    acc = dm.acceptance()
    probs = dm.diagonal() / acc
    mc = TrajectoryEngine(c.n_qubits, shots, noise, rng_for(seed, 0)).run(c)
    n = len(mc)
    counts = np.bincount(mc.sample_bits(), minlength=probs.size)
    z = max(abs(_binomial_z(int(k), n, float(q))) for k, q in zip(counts, probs))
    return CrossCheck(name, shots, n, acc, _binomial_z(n, shots, acc), z)
