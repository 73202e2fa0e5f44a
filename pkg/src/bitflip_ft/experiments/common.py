"""Seeding, shot sampling and CSV output shared by the experiments."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, is_dataclass
from importlib import metadata
from typing import Any, Iterable, Sequence

import numpy as np

from ..circuit import Circuit
from ..repcode import CodeBlock

VARIANTS = ("bare", "encoded", "encoded_with_EC")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout without install
        return "0+unknown"


def check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    return variant


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for ``(seed, *keys)``; the same keys always give the same stream."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def config_hash(config: Any) -> str:
    if is_dataclass(config):
        config = asdict(config)
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------- sampling

def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial tally of ``shots`` accepted shots over outcome probabilities."""
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    total = probs.sum()
    if total <= 0:
        raise ValueError("outcome distribution has no weight")
    return rng.multinomial(shots, probs / total)


def sample_raw_shots(accepted: int, acceptance: float, rng: np.random.Generator) -> int:
    """Shots drawn until ``accepted`` of them pass, each passing with ``acceptance``."""
    if not 0 < acceptance <= 1:
        raise ValueError("acceptance probability must lie in (0, 1]")
    if acceptance == 1.0:
        return accepted
    return accepted + int(rng.negative_binomial(accepted, acceptance))


def decoded_distribution(diag: np.ndarray, blocks: Sequence[CodeBlock | tuple[int, ...]]) -> np.ndarray:
    """Logical outcome weights from basis-state weights, majority-decoding each block.

    Outcome index bit ``k`` is the value of logical qubit ``k``.
    """
    idx = np.arange(diag.size)
    logical = np.zeros(diag.size, dtype=np.int64)
    for k, blk in enumerate(blocks):
        qs = tuple(blk)
        ones = sum((idx >> q) & 1 for q in qs)
        logical |= ((2 * ones > len(qs)).astype(np.int64)) << k
    return np.bincount(logical, weights=diag, minlength=1 << len(blocks))


def slice_circuit(circuit: Circuit, start: int, stop: int) -> Circuit:
    return Circuit(circuit.n_qubits, list(circuit.instructions[start:stop]),
                   name=f"{circuit.name}[{start}:{stop}]")


# ---------------------------------------------------------------- output

def header_lines(command: str, config: Any, seed: int, extra: dict | None = None) -> list[str]:
    fields = {"tool": "bitflip_ft", "version": tool_version(), "command": command,
              "config_hash": config_hash(config), "seed": int(seed),
              "channel": "product"}  # two-qubit gates: independent single-qubit channel per wire
    fields.update(extra or {})
    return ["# " + " ".join(f"{k}={v}" for k, v in fields.items())]


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(columns: Sequence[str], rows: Iterable[dict], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def to_json(rows: Sequence[dict], meta: dict) -> str:
    clean = [{k: (float(v) if isinstance(v, np.floating) else int(v) if isinstance(v, np.integer) else v)
              for k, v in r.items()} for r in rows]
    return json.dumps({"meta": meta, "rows": clean}, indent=2, sort_keys=True)
