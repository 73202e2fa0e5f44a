"""Exhaustive single-fault analysis of gadget circuits.

For every fault site the circuit is run noiselessly on the density-matrix
engine with one Pauli inserted there. Each accepted measurement branch is
classified by comparing its output blocks with the ideal output and with the
ideal output carrying one physical X. Summing the branch weights gives the
order-``p`` coefficients of the output state, conditioned on the logical
outcome of the gadget:

    rho_k = (1 - c0) rho + sum_{a,j} c_{a,j} p X_{a,j} rho X_{a,j} + O(p^2)

with ``c_{a,j} = sum_s P(k, accepted, class X_{a,j} | s) / P_0(k)`` and the
identity deficit ``c0 = sum c_{a,j}`` after renormalisation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .circuit import Circuit, Cond, Measure, Op, Postselect, Reset
from .engines import DensityEngine
from .gadgets import DEFAULT_POSTSELECT, GadgetOutcome, build_gadget, naive_prep_plus_i
from .gates import gate_matrix
from .noise import NOISELESS, NoiseSpec
from .pauli import PauliString, conjugate_clifford
from .repcode import CodeBlock, encoded_state, error_correct, syndrome_round
from .states import DensityMatrix, StateVector

THRESHOLD = 1 - 1e-9
IDENTITY = "I"
VIOLATION = "VIOLATION"


class BiasPreservationError(AssertionError):
    """A single fault produced an accepted output outside {rho, X rho X}."""


class AmbiguousClassification(AssertionError):
    pass


@dataclass(frozen=True)
class FaultSite:
    """An X insertion point: after instruction ``index`` on ``qubit``.

    ``index == -1`` marks an error already present on the input.
    """
    index: int
    qubit: int


def enumerate_faults(circuit: Circuit, incoming: Sequence[int] = ()) -> list[FaultSite]:
    """One site per gate wire, in circuit order, optionally preceded by input sites."""
    sites = [FaultSite(-1, q) for q in incoming]
    for i, ins in enumerate(circuit.instructions):
        if isinstance(ins, (Op, Cond)):
            sites.extend(FaultSite(i, q) for q in ins.gate.qubits)
        elif not isinstance(ins, (Reset, Measure, Postselect)):
            raise TypeError(f"unsupported instruction {ins!r}")
    return sites


@dataclass
class Branch:
    record: dict
    weight: float
    state: DensityMatrix  # normalised, full register


def run_with_fault(circuit: Circuit, site: Optional[FaultSite], rho: DensityMatrix,
                   letter: str = "X") -> tuple[list[Branch], float]:
    """Noiseless run with one Pauli at ``site``; returns accepted branches and discarded weight."""
    if site is not None and site.index == -1:
        eng = DensityEngine(rho.n_qubits, NOISELESS, rho, keep_records=True)
        eng.branches = {(): eng._pauli(eng.branches[()], letter, site.qubit)}
        eng.run(circuit, strict=False)
    else:
        fault = None if site is None else (site.index, PauliString({site.qubit: letter}))
        eng = DensityEngine(rho.n_qubits, NOISELESS, rho, keep_records=True).run(circuit, fault, strict=False)
    out = []
    for rec, v in eng.branches.items():
        w = eng.trace(v)
        if w <= 1e-14:
            continue
        m = eng.branch_density(rec).entries / w
        out.append(Branch(dict(rec), w, DensityMatrix(rho.n_qubits, m)))
    return out, eng.discarded


def output_qubits(blocks: Sequence[CodeBlock]) -> list[int]:
    return [q for b in blocks for q in b]


def _local_blocks(blocks: Sequence[CodeBlock]) -> list[CodeBlock]:
    return [CodeBlock((3 * a, 3 * a + 1, 3 * a + 2)) for a in range(len(blocks))]


def classify_output(output: DensityMatrix, ideal: StateVector,
                    blocks: Sequence[CodeBlock]) -> str | tuple[int, int]:
    """IDENTITY, (block a, qubit j) for a single X error, or VIOLATION.

    ``output`` and ``ideal`` are over the qubits of ``blocks`` only, in block
    order. Raises :class:`AmbiguousClassification` if two candidates match.
    """
    a_ideal = ideal.amplitudes
    hits = []
    if np.vdot(a_ideal, output.entries @ a_ideal).real > THRESHOLD:
        hits.append(IDENTITY)
    for a, blk in enumerate(blocks):
        for j, q in enumerate(blk):
            flipped = a_ideal[np.arange(a_ideal.size) ^ (1 << q)]
            if np.vdot(flipped, output.entries @ flipped).real > THRESHOLD:
                hits.append((a, j))
    if len(hits) > 1:
        raise AmbiguousClassification(f"output matches several candidates: {hits}")
    return hits[0] if hits else VIOLATION


# ---------------------------------------------------------------- expansions

@dataclass
class ErrorExpansion:
    """Order-p coefficients of the renormalised output, for one logical outcome."""
    x_coeffs: dict[tuple[int, int], float] = field(default_factory=dict)
    discard_prob: float = 0.0

    @property
    def identity_coeff(self) -> float:
        """Coefficient of p in the identity term (``-c0``)."""
        return -sum(self.x_coeffs.values())

    def as_list(self, n_blocks: int) -> list[float]:
        return [self.x_coeffs.get((a, j), 0.0) for a in range(n_blocks) for j in range(3)]

    def matches(self, expected: "ErrorExpansion", n_blocks: int, tol: float = 1e-9) -> bool:
        got, want = self.as_list(n_blocks), expected.as_list(n_blocks)
        return all(abs(g - w) <= tol for g, w in zip(got, want)) and \
            abs(self.identity_coeff - expected.identity_coeff) <= tol


def expansion_from(coeffs: Sequence[float]) -> ErrorExpansion:
    """Build an expansion from a flat list (block 0 qubits 1..3, then block 1, ...)."""
    return ErrorExpansion({(k // 3, k % 3): float(c) for k, c in enumerate(coeffs) if c})


@dataclass
class SiteReport:
    site: FaultSite
    classes: dict  # outcome -> {class: weight}
    discarded: float


@dataclass
class Derivation:
    expansions: dict  # outcome -> ErrorExpansion
    sites: list[SiteReport]
    violations: list[tuple[FaultSite, object]]
    n_blocks: int
    total_discard: float


@dataclass(frozen=True)
class GadgetCase:
    """A circuit with its input blocks, outcome decoder and ideal logical action."""
    name: str
    circuit: Circuit
    outcome: GadgetOutcome
    inputs: tuple[CodeBlock, ...]
    ideal: Callable[[np.ndarray], np.ndarray]
    measured: bool = False  # ideal takes (logical, outcome) and returns the projected state

    @property
    def n_logical_in(self) -> int:
        return len(self.inputs)

    def ideal_for(self, logical: np.ndarray, outcome) -> np.ndarray:
        return self.ideal(logical, outcome) if self.measured else self.ideal(logical)


def random_logical_states(n_logical: int, count: int, seed: int = 2024) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.normal(size=1 << n_logical) + 1j * rng.normal(size=1 << n_logical)
        out.append(v / np.linalg.norm(v))
    return out


def _outcome_key(outcome: GadgetOutcome, record: dict):
    return outcome.outcome(record)


def derive_expansion(case: GadgetCase, n_inputs: int = 3, seed: int = 2024,
                     letter: str = "X", incoming: Sequence[int] = ()) -> Derivation:
    """Enumerate single faults, classify every accepted branch and sum coefficients.

    Classifications must agree across the random inputs; a disagreement or any
    VIOLATION is recorded in ``violations``.
    """
    circuit, out = case.circuit, case.outcome
    n = circuit.n_qubits
    keep = output_qubits(out.output_blocks)
    local = _local_blocks(out.output_blocks)
    sites = enumerate_faults(circuit, incoming)
    inputs = random_logical_states(case.n_logical_in, n_inputs, seed) if case.inputs else [np.ones(1)]

    per_input = []
    for logical in inputs:
        rho = encoded_state(n, case.inputs, logical).density() if case.inputs \
            else DensityMatrix.zero(n)
        ideals: dict = {}

        def ideal(k):
            if k not in ideals:
                ideals[k] = encoded_state(len(keep), local, case.ideal_for(logical, k))
            return ideals[k]

        base, _ = run_with_fault(circuit, None, rho)
        p0: dict = {}
        for br in base:
            k = _outcome_key(out, br.record)
            p0[k] = p0.get(k, 0.0) + br.weight
        reports = []
        for site in sites:
            classes: dict = {}
            branches, discarded = run_with_fault(circuit, site, rho, letter)
            for br in branches:
                k = _outcome_key(out, br.record)
                cls = classify_output(br.state.partial_trace(keep), ideal(k), local)
                bucket = classes.setdefault(k, {})
                bucket[cls] = bucket.get(cls, 0.0) + br.weight
            reports.append(SiteReport(site, classes, discarded))
        per_input.append((p0, reports))

    p0, reports = per_input[0]
    violations = []
    for i, rep in enumerate(reports):
        for k, bucket in rep.classes.items():
            if VIOLATION in bucket and bucket[VIOLATION] > 1e-12:
                violations.append((rep.site, k))
        for p0_other, other in per_input[1:]:
            if not _same_classes(rep, other[i], p0, p0_other):
                violations.append((rep.site, "input-dependent"))
    expansions = {}
    for k, prob in p0.items():
        exp = ErrorExpansion()
        for rep in reports:
            for cls, w in rep.classes.get(k, {}).items():
                if cls not in (IDENTITY, VIOLATION):
                    exp.x_coeffs[cls] = exp.x_coeffs.get(cls, 0.0) + w / prob
        exp.discard_prob = sum(r.discarded for r in reports)
        expansions[k] = exp
    total_discard = sum(r.discarded for r in reports)
    return Derivation(expansions, reports, violations, len(local), total_discard)


def expansion_by_channel(case: GadgetCase, p: float = 1e-7, seed: int = 2024) -> dict:
    """Second route to the X coefficients: the full noise channel at small ``p``.

    For each outcome the accepted output is compared with the ideal output
    carrying ``X_{a,j}``; the overlap divided by ``p`` approaches ``c_{a,j}``.
    """
    circuit, out = case.circuit, case.outcome
    n = circuit.n_qubits
    keep = output_qubits(out.output_blocks)
    local = _local_blocks(out.output_blocks)
    logical = random_logical_states(case.n_logical_in, 1, seed)[0] if case.inputs else np.ones(1)
    rho = encoded_state(n, case.inputs, logical).density() if case.inputs else DensityMatrix.zero(n)
    eng = DensityEngine(n, NoiseSpec(p), rho, keep_records=True).run(circuit)
    per_outcome: dict = {}
    for rec, v in eng.branches.items():
        k = _outcome_key(out, dict(rec))
        m = eng.branch_density(rec).entries
        per_outcome[k] = per_outcome[k] + m if k in per_outcome else m
    coeffs = {}
    for k, m in per_outcome.items():
        red = DensityMatrix(n, m / np.trace(m).real).partial_trace(keep).entries
        ideal = encoded_state(len(keep), local, case.ideal_for(logical, k)).amplitudes
        row = []
        for blk in local:
            for q in blk:
                flipped = ideal[np.arange(ideal.size) ^ (1 << q)]
                row.append(float(np.vdot(flipped, red @ flipped).real) / p)
        coeffs[k] = row
    return coeffs


def _same_classes(a: SiteReport, b: SiteReport, pa: dict, pb: dict, tol: float = 1e-9) -> bool:
    """Equal class weights conditioned on the no-fault outcome probabilities."""
    if set(a.classes) != set(b.classes):
        return False
    for k in a.classes:
        x, y = a.classes[k], b.classes[k]
        if set(x) != set(y) or any(abs(x[c] / pa[k] - y[c] / pb[k]) > tol for c in x):
            return False
    return abs(a.discarded - b.discarded) <= tol


# ---------------------------------------------------------------- gadget registry

def _mat(kind: str, theta=None) -> Callable[[np.ndarray], np.ndarray]:
    m = gate_matrix(kind, theta)
    return lambda v: m @ v


def _const(vec) -> Callable[[np.ndarray], np.ndarray]:
    v = np.asarray(vec, dtype=complex)
    return lambda _: v / np.linalg.norm(v)


def _x_projection(v: np.ndarray, outcome: int) -> np.ndarray:
    sign = 1 if outcome == 0 else -1
    w = np.array([v[0] + sign * v[1], sign * (v[0] + sign * v[1])]) / 2
    return w / np.linalg.norm(w)


def ec_case(rounds: int) -> GadgetCase:
    c = Circuit(4, name=f"ec{rounds}")
    b = CodeBlock((0, 1, 2))
    error_correct(c, b, 3, rounds)
    return GadgetCase(f"ec{rounds}", c, GadgetOutcome((b,)), (b,), lambda v: v)


def syndrome_case() -> GadgetCase:
    c = Circuit(4, name="syndrome_round")
    b = CodeBlock((0, 1, 2))
    syndrome_round(c, b, 3)
    return GadgetCase("syndrome_round", c, GadgetOutcome((b,)), (b,), lambda v: v)


def gadget_case(name: str, theta: float = math.pi / 7, postselect: str = DEFAULT_POSTSELECT) -> GadgetCase:
    """Registered stand-alone gadget with its ideal logical action."""
    if name in ("ec2", "ec3"):
        return ec_case(int(name[-1]))
    if name == "naive_prep_plus_i":
        c = Circuit(3, name=name)
        b = CodeBlock((0, 1, 2))
        return GadgetCase(name, c, naive_prep_plus_i(c, b), (), _const([1, 1j]))
    c, out, inputs = build_gadget(name, theta, postselect)
    if name == "MeasX_L":
        return GadgetCase(name, c, out, inputs, _x_projection, measured=True)
    ideal = {
        "X_L": _mat("X"), "Y_L": _mat("Y"), "Z_L": _mat("Z"),
        "CNOT_L": _mat("CNOT"), "CZ_L": _mat("CZ"),
        "prep_plus": _const([1, 1]), "prep_plus_i": _const([1, 1j]),
        "S_L": _mat("S"), "H_L": _mat("H"), "Rz_L": _mat("Rz", theta),
    }[name]
    return GadgetCase(name, c, out, inputs, ideal)


# published coefficients of p: (outcome -> X coefficients, block-major)
REFERENCE_EXPANSIONS: dict[str, dict] = {
    "ec3": {None: (2, 4, 2)},
    "ec2": {None: (3, 2, 2)},
    "prep_plus": {None: (1, 2, 1)},
    "prep_plus_i": {None: (1, 1, 1)},
    "CZ_L": {None: (2, 2, 1, 2, 2, 1)},
    "S_L": {0: (2, 2, 2), 1: (3, 3, 3)},
    "H_L": {0: (3, 4, 2), 1: (4, 5, 3)},
    "Rz_L": {0: (1, 1, 1), 1: (1, 1, 2)},
}

# postselection rule under which each gadget is analysed
ANALYSIS_RULE = {"CZ_L": "none"}
DEFAULT_ANALYSIS_RULE = DEFAULT_POSTSELECT

RZ_ANGLES = (math.pi / 7, math.pi / 3, 1.0)


@dataclass
class VerificationReport:
    name: str
    outcome: object
    expected: list[float]
    derived: list[float]
    identity_expected: float
    identity_derived: float
    violations: int
    passed: bool
    theta: Optional[float] = None
    postselect: str = "any"
    discard: float = 0.0

    def to_dict(self) -> dict:
        return {
            "gadget": self.name, "outcome": self.outcome, "theta": self.theta,
            "postselect": self.postselect,
            "expected": {"identity": self.identity_expected, "x": self.expected},
            "derived": {"identity": self.identity_derived, "x": self.derived},
            "discard_coeff": self.discard, "violations": self.violations,
            "status": "PASS" if self.passed else "FAIL",
        }


def verify_gadget(name: str, theta: Optional[float] = None, n_inputs: int = 3,
                  postselect: Optional[str] = None) -> tuple[list[VerificationReport], Derivation]:
    """Derive a registered gadget's expansion and compare with its reference coefficients."""
    rule = postselect or ANALYSIS_RULE.get(name, DEFAULT_ANALYSIS_RULE)
    case = gadget_case(name, theta if theta is not None else math.pi / 7, rule)
    der = derive_expansion(case, n_inputs)
    reports = []
    for outcome, coeffs in REFERENCE_EXPANSIONS[name].items():
        want = expansion_from(coeffs)
        got = der.expansions.get(outcome, ErrorExpansion())
        ok = got.matches(want, der.n_blocks) and not der.violations
        reports.append(VerificationReport(
            name, outcome, want.as_list(der.n_blocks), got.as_list(der.n_blocks),
            want.identity_coeff, got.identity_coeff, len(der.violations), ok,
            theta if name == "Rz_L" else None, rule, der.total_discard))
    return reports, der


def verify_all(n_inputs: int = 3) -> list[VerificationReport]:
    out = []
    for name in REFERENCE_EXPANSIONS:
        angles = RZ_ANGLES if name == "Rz_L" else (None,)
        for theta in angles:
            reps, _ = verify_gadget(name, theta, n_inputs)
            out.extend(reps)
    return out


# gadgets without published coefficients, checked for violations only
SCAN_ONLY = ("CNOT_L", "X_L", "Y_L", "Z_L", "MeasX_L")


def bias_scan(names: Sequence[str] = SCAN_ONLY, n_inputs: int = 3) -> list[dict]:
    """Single-fault violation count for each named gadget."""
    out = []
    for name in names:
        rule = ANALYSIS_RULE.get(name, DEFAULT_ANALYSIS_RULE)
        der = derive_expansion(gadget_case(name, postselect=rule), n_inputs)
        out.append({"gadget": name, "postselect": rule, "sites": len(der.sites),
                    "violations": len(der.violations), "status": "FAIL" if der.violations else "PASS"})
    return out


def report_json(reports: Sequence[VerificationReport], scan: Sequence[dict] = ()) -> str:
    return json.dumps({"expansions": [r.to_dict() for r in reports], "bias_scan": list(scan)}, indent=2)


# ---------------------------------------------------------------- double-round locations

# instruction offsets within one syndrome round: CNOT(q1,a) CNOT(q2,a) M R CNOT(q2,a) CNOT(q3,a) M R
_ROUND_SITES = ((0, 0), (1, 1), (4, 1), (5, 2), (0, 3), (1, 3), (4, 3), (5, 3))


def location_site(location: int) -> FaultSite:
    """Fault site for a numbered location of the syndrome-extraction circuit.

    Locations 1-3 are errors on the incoming data qubits; each following group
    of eight covers one round: data wires of the four CNOTs, then ancilla wires.
    Qubits 0-2 are the block and 3 is the ancilla.
    """
    if 1 <= location <= 3:
        return FaultSite(-1, location - 1)
    r, k = divmod(location - 4, 8)
    if location < 4 or r > 1:
        raise ValueError("locations run from 1 to 19")
    off, q = _ROUND_SITES[k]
    return FaultSite(8 * r + off, q)


def location_outcome(location: int, rounds: int) -> tuple[list[tuple[int, int]], str | tuple[int, int]]:
    """Observed syndromes and output class for an X fault at ``location`` in EC with ``rounds``."""
    case = ec_case(rounds)
    rho = encoded_state(4, case.inputs, random_logical_states(1, 1)[0]).density()
    branches, _ = run_with_fault(case.circuit, location_site(location), rho)
    if len(branches) != 1:
        raise AssertionError("a single X fault should give a deterministic syndrome history")
    br = branches[0]
    keys = case.circuit.measurement_keys()
    bits = [br.record[k] for k in keys]
    synd = [(1 - 2 * bits[2 * r], 1 - 2 * bits[2 * r + 1]) for r in range(rounds)]
    logical = random_logical_states(1, 1)[0]
    ideal = encoded_state(3, _local_blocks(case.inputs), logical)
    cls = classify_output(br.state.partial_trace([0, 1, 2]), ideal, _local_blocks(case.inputs))
    return synd, cls


# ---------------------------------------------------------------- propagation cross-check

def propagate(pauli: PauliString, circuit: Circuit, start: int) -> PauliString:
    """Push a Pauli through the unconditional Clifford gates after instruction ``start``."""
    for ins in circuit.instructions[start + 1:]:
        if isinstance(ins, Op):
            pauli = conjugate_clifford(pauli, ins.gate.kind, ins.gate.qubits)
        elif not isinstance(ins, Reset):
            raise ValueError("propagation only covers unconditional gate sequences")
    return pauli
