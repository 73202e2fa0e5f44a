"""Repeated-layer fidelity benchmark on two qubits, bare and encoded."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit
from ..engines import BitEngine
from ..gadgets import logical_cnot, logical_pauli
from ..gates import CNOT, X
from ..noise import NoiseSpec
from ..repcode import CodeBlock, error_correct
from .common import VARIANTS, check_variant, rng_for

CHUNK = 20_000

# one layer, as (kind, logical qubits); it maps |00> back to |00>
LAYER = (("X", (0,)), ("CNOT", (0, 1)), ("X", (1,)), ("CNOT", (1, 0)), ("X", (0,)), ("CNOT", (0, 1)))


@dataclass(frozen=True)
class BenchmarkConfig:
    depth: int
    p: float
    shots: int
    variant: str = "bare"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        check_variant(self.variant)


@dataclass(frozen=True)
class BenchmarkResult:
    config: BenchmarkConfig
    fidelity: float
    stderr: float
    successes: int
    shots: int


def benchmark_circuit(depth: int, variant: str) -> tuple[Circuit, list[tuple[int, ...]]]:
    """The layer repeated ``depth`` times; returns the circuit and the qubits read out per logical qubit."""
    check_variant(variant)
    if variant == "bare":
        c = Circuit(2, name=f"benchmark-bare-{depth}")
        for _ in range(depth):
            for kind, qs in LAYER:
                c.gate(X(qs[0]) if kind == "X" else CNOT(*qs))
        return c, [(0,), (1,)]
    blocks = [CodeBlock((0, 1, 2)), CodeBlock((3, 4, 5))]
    anc = 6
    c = Circuit(7, name=f"benchmark-{variant}-{depth}")
    for _ in range(depth):
        for kind, qs in LAYER:
            if kind == "X":
                logical_pauli(c, "X", blocks[qs[0]])
            else:
                logical_cnot(c, blocks[qs[0]], blocks[qs[1]])
        if variant == "encoded_with_EC":
            for b in blocks:
                error_correct(c, b, anc, rounds=2)
    return c, [b.qubits for b in blocks]


def _decoded_zero(bits: np.ndarray, readout: list[tuple[int, ...]]) -> np.ndarray:
    ok = np.ones(bits.shape[0], dtype=bool)
    for qs in readout:
        ones = bits[:, list(qs)].sum(axis=1)
        ok &= 2 * ones < len(qs)
    return ok


def run_benchmark(cfg: BenchmarkConfig, seed: int, threads: int = 1) -> BenchmarkResult:
    """F = fraction of shots whose decoded readout is |00>, with its binomial standard error.

    Shots run in fixed chunks seeded by (seed, variant, depth, chunk), so the
    tallies do not depend on ``threads``.
    """
    circuit, readout = benchmark_circuit(cfg.depth, cfg.variant)
    noise = NoiseSpec(cfg.p, cfg.epsilon)
    vid = VARIANTS.index(cfg.variant)
    sizes = [min(CHUNK, cfg.shots - s) for s in range(0, cfg.shots, CHUNK)]

    def chunk(i: int) -> int:
        eng = BitEngine(circuit.n_qubits, sizes[i], noise, rng_for(seed, vid, cfg.depth, i))
        eng.run(circuit)
        return int(_decoded_zero(eng.bits, readout).sum())

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(threads) as pool:
            hits = sum(pool.map(chunk, range(len(sizes))))
    else:
        hits = sum(chunk(i) for i in range(len(sizes)))
    f = hits / cfg.shots
    return BenchmarkResult(cfg, f, math.sqrt(f * (1 - f) / cfg.shots), hits, cfg.shots)


def benchmark_rows(results: list[BenchmarkResult]) -> list[dict]:
    return [{"variant": r.config.variant, "d": r.config.depth, "p": r.config.p,
             "shots": r.shots, "F": r.fidelity, "stderr": r.stderr} for r in results]


BENCHMARK_COLUMNS = ("variant", "d", "p", "shots", "F", "stderr")
