"""Bias-preserving logical gates on the distance-3 bit-flip code.

Every builder appends instructions to a :class:`~bitflip_ft.circuit.Circuit`
and returns a :class:`GadgetOutcome` naming the blocks that carry the logical
output and the measurement keys that decide the logical outcome. Whether a run
is accepted is decided when the circuit executes, at the postselection
checkpoints the builder emitted.

Postselection after syndrome checks is controlled by ``postselect``:

* ``"any"`` discards the run on any nontrivial syndrome.
* ``"phase"`` discards only on syndromes that point at a flip of the first
  qubit (Z1Z2 = -1 with Z2Z3 = +1). The first qubit is the one touched by the
  CZ, S and Rz gates, so only a flip there can carry a phase error with it.
* ``"none"`` still measures the syndrome but keeps every run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence


from .circuit import Circuit, Condition
from .gates import CNOT, CZ, H, Rz, S, Sdg, X, Y, Z
from .repcode import CodeBlock, majority_vote, measure_stabilizer, syndrome_round

POSTSELECT_RULES = ("any", "phase", "none")
DEFAULT_POSTSELECT = "phase"


@dataclass(frozen=True)
class GadgetOutcome:
    output_blocks: tuple[CodeBlock, ...]
    outcome_keys: tuple[str, ...] = ()
    checks: tuple[str, ...] = ()

    def outcome(self, record: dict) -> Optional[int]:
        """Majority of the outcome bits in ``record`` (``None`` for gadgets without one)."""
        if not self.outcome_keys:
            return None
        return majority_vote([int(record[k]) for k in self.outcome_keys])


LOGICAL_KINDS = {
    "X_L": 1, "Y_L": 1, "Z_L": 1, "CNOT_L": 2, "CZ_L": 2, "S_L": 1, "Sdg_L": 1, "H_L": 1,
    "Rz_L": 1, "Rx_L": 1, "Ry_L": 1, "MeasX_L": 1, "PrepPlus": 1, "PrepPlusI": 1, "PrepMinusI": 1,
}


@dataclass(frozen=True)
class LogicalOpSpec:
    kind: str
    targets: tuple[int, ...]
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in LOGICAL_KINDS:
            raise ValueError(f"unknown logical operation {self.kind!r}")
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(self.targets) != LOGICAL_KINDS[self.kind]:
            raise ValueError(f"{self.kind} acts on {LOGICAL_KINDS[self.kind]} logical qubit(s)")
        if (self.kind in ("Rz_L", "Rx_L", "Ry_L")) != (self.theta is not None):
            raise ValueError(f"{self.kind}: angle given iff the operation is a rotation")


def _rule(postselect: str) -> str:
    if postselect not in POSTSELECT_RULES:
        raise ValueError(f"postselect must be one of {POSTSELECT_RULES}")
    return postselect


def _first_qubit_flag(bits: Sequence[int]) -> bool:
    # bits come in (z12, z23) pairs; a lone z12 bit is its own signature
    if len(bits) == 1:
        return bits[0] == 1
    return any(bits[i] == 1 and bits[i + 1] == 0 for i in range(0, len(bits), 2))


def _check(circuit: Circuit, keys: Sequence[str], postselect: str, label: str) -> tuple[str, ...]:
    """Postselection on syndrome ``keys`` (a lone Z1Z2 key or (z12, z23) pairs)."""
    rule = _rule(postselect)
    if rule == "none":
        return ()
    if rule == "any":
        cond = Condition.from_function(keys, lambda *b: not any(b))
    else:
        cond = Condition.from_function(keys, lambda *b: not _first_qubit_flag(b))
    circuit.postselect(cond, label)
    return (label,)


def _majority_is_one(keys: Sequence[str]) -> Condition:
    return Condition.from_function(keys, lambda a, b, c: a + b + c >= 2)


def _disjoint(*blocks: CodeBlock) -> None:
    for i, a in enumerate(blocks):
        for b in blocks[i + 1:]:
            if a.overlaps(b):
                raise ValueError(f"blocks {a.qubits} and {b.qubits} overlap")


def _free_ancilla(ancilla: int, *blocks: CodeBlock) -> None:
    for b in blocks:
        if ancilla in b.qubits:
            raise ValueError(f"ancilla {ancilla} collides with block {b.qubits}")


# ---------------------------------------------------------------- transversal

def logical_pauli(circuit: Circuit, kind: str, block: CodeBlock,
                  condition: Optional[Condition] = None) -> GadgetOutcome:
    """X_L = XXX, Y_L = YXX, Z_L = Z on the first qubit; optionally classically controlled."""
    if kind == "X":
        gates = [X(q) for q in block]
    elif kind == "Y":
        gates = [Y(block[0])] + [X(q) for q in block.qubits[1:]]
    elif kind == "Z":
        gates = [Z(block[0])]
    else:
        raise ValueError(f"logical Pauli must be X, Y or Z, got {kind!r}")
    for g in gates:
        if condition is None:
            circuit.gate(g)
        else:
            circuit.cond(g, condition)
    return GadgetOutcome((block,))


def logical_cnot(circuit: Circuit, control: CodeBlock, target: CodeBlock) -> GadgetOutcome:
    _disjoint(control, target)
    for c, t in zip(control, target):
        circuit.gate(CNOT(c, t))
    return GadgetOutcome((control, target))


# ---------------------------------------------------------------- resource states

def prep_plus(circuit: Circuit, block: CodeBlock) -> GadgetOutcome:
    """|+>_L = (|000> + |111>)/sqrt(2) from freshly reset qubits."""
    circuit.reset(*block.qubits)
    q1 = block[0]
    circuit.gate(H(q1))
    for q in block.qubits[1:]:
        circuit.gate(CNOT(q1, q))
    return GadgetOutcome((block,))


def prep_plus_i(circuit: Circuit, block: CodeBlock, ancilla: int, sign: int = +1,
                postselect: str = DEFAULT_POSTSELECT) -> GadgetOutcome:
    """|+i>_L (or |-i>_L for ``sign=-1``): |+>_L, S on the first qubit, then check Z1Z2.

    An X fault that reaches the first qubit before S leaves a Y there; the
    accompanying bit flip trips the Z1Z2 check.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    _free_ancilla(ancilla, block)
    prep_plus(circuit, block)
    circuit.gate(S(block[0]) if sign == 1 else Sdg(block[0]))
    circuit.reset(ancilla)
    key = measure_stabilizer(circuit, block[0], block[1], ancilla, "z12")
    checks = _check(circuit, [key], postselect, "prep_plus_i")
    return GadgetOutcome((block,), (), checks)


def naive_prep_plus_i(circuit: Circuit, block: CodeBlock, sign: int = +1) -> GadgetOutcome:
    """|+i>_L without the Z1Z2 check. Not bias-preserving; kept as a negative control."""
    prep_plus(circuit, block)
    circuit.gate(S(block[0]) if sign == 1 else Sdg(block[0]))
    return GadgetOutcome((block,))


# ---------------------------------------------------------------- CZ and X measurement

def logical_cz(circuit: Circuit, first: CodeBlock, second: CodeBlock, ancilla: int,
               postselect: str = DEFAULT_POSTSELECT) -> GadgetOutcome:
    """CZ between the first physical qubits, then one syndrome round on each block."""
    _disjoint(first, second)
    _free_ancilla(ancilla, first, second)
    circuit.gate(CZ(first[0], second[0]))
    circuit.reset(ancilla)
    keys = list(syndrome_round(circuit, first, ancilla))
    keys += syndrome_round(circuit, second, ancilla)
    checks = _check(circuit, keys, postselect, "cz")
    return GadgetOutcome((first, second), (), checks)


def measure_x_logical(circuit: Circuit, block: CodeBlock, ancilla: int,
                      repeats: int = 3) -> GadgetOutcome:
    """Measure X_L = XXX with a recycled ancilla; ``repeats`` bits are majority-voted.

    Bit 0 means eigenvalue +1.
    """
    _free_ancilla(ancilla, block)
    keys = []
    for _ in range(repeats):
        circuit.reset(ancilla)
        circuit.gate(H(ancilla))
        for q in block:
            circuit.gate(CNOT(ancilla, q))
        circuit.gate(H(ancilla))
        keys.append(circuit.measure(ancilla, "mx"))
    circuit.reset(ancilla)
    return GadgetOutcome((block,), tuple(keys))


def measure_z_logical(circuit: Circuit, block: CodeBlock) -> GadgetOutcome:
    """Transversal Z readout of every physical qubit; the logical bit is their majority."""
    keys = tuple(circuit.measure(q, "mz") for q in block)
    return GadgetOutcome((), keys)


# ---------------------------------------------------------------- teleported gates

def s_teleport(circuit: Circuit, data: CodeBlock, resource: CodeBlock, ancilla: int,
               sign: int = +1, postselect: str = DEFAULT_POSTSELECT) -> GadgetOutcome:
    """S_L (``sign=+1``) or Sdg_L (``sign=-1``) by teleportation onto ``resource``.

    The resource is prepared as |+i>_L or |-i>_L, CNOTs run resource -> data, the
    data block is read out qubit-wise, and on a majority 1 the resource gets Y_L.
    """
    _disjoint(data, resource)
    _free_ancilla(ancilla, data, resource)
    prep = prep_plus_i(circuit, resource, ancilla, sign, postselect)
    for r, d in zip(resource, data):
        circuit.gate(CNOT(r, d))
    readout = measure_z_logical(circuit, data)
    logical_pauli(circuit, "Y", resource, _majority_is_one(readout.outcome_keys))
    return GadgetOutcome((resource,), readout.outcome_keys, prep.checks)


def h_teleport(circuit: Circuit, data: CodeBlock, resource: CodeBlock, ancilla: int,
               postselect: str = DEFAULT_POSTSELECT) -> GadgetOutcome:
    """H_L by teleportation: |+>_L resource, CZ_L, X_L readout of data, X_L correction."""
    _disjoint(data, resource)
    _free_ancilla(ancilla, data, resource)
    prep_plus(circuit, resource)
    cz = logical_cz(circuit, resource, data, ancilla, postselect)
    mx = measure_x_logical(circuit, data, ancilla)
    logical_pauli(circuit, "X", resource, _majority_is_one(mx.outcome_keys))
    return GadgetOutcome((resource,), mx.outcome_keys, cz.checks)


def rz_gadget(circuit: Circuit, data: CodeBlock, helper: CodeBlock, ancilla: int, theta: float,
              postselect: str = DEFAULT_POSTSELECT) -> GadgetOutcome:
    """Rz_L(theta) on ``data`` using a fresh helper block.

    The data is copied into the helper by transversal CNOTs, Rz acts on the
    first helper qubit, the helper is checked and read out in the X basis, and
    an X_L outcome of -1 is fixed by Z on the last data qubit.
    """
    _disjoint(data, helper)
    _free_ancilla(ancilla, data, helper)
    circuit.reset(*helper.qubits)
    for d, h in zip(data, helper):
        circuit.gate(CNOT(d, h))
    circuit.gate(Rz(helper[0], theta))
    circuit.reset(ancilla)
    keys = syndrome_round(circuit, helper, ancilla)
    checks = _check(circuit, keys, postselect, "rz")
    mx = measure_x_logical(circuit, helper, ancilla)
    circuit.cond(Z(data[2]), _majority_is_one(mx.outcome_keys))
    return GadgetOutcome((data,), mx.outcome_keys, checks)


def rotation_decompose(kind: str, theta: float) -> list[str | tuple[str, float]]:
    """Time-ordered logical gate list for Rx or Ry built from H_L, S_L, Sdg_L and Rz_L."""
    if kind == "Rx":
        return ["H_L", ("Rz_L", theta), "H_L"]
    if kind == "Ry":
        return ["Sdg_L", "H_L", ("Rz_L", theta), "H_L", "S_L"]
    raise ValueError("only Rx and Ry are decomposed")


# ---------------------------------------------------------------- register with moving blocks

@dataclass
class LogicalRegister:
    """Logical qubits stored in blocks that move when a gate is teleported.

    Physical layout: ``n_logical + 1`` blocks of three qubits followed by one
    recycled ancilla. One block is always free; teleported gadgets write their
    output there and release the consumed block.
    """

    n_logical: int
    postselect: str = DEFAULT_POSTSELECT
    ec_after_h: bool = False
    ec_rounds: int = 2
    circuit: Circuit = field(init=False)
    blocks: list[CodeBlock] = field(init=False)
    free: CodeBlock = field(init=False)
    ancilla: int = field(init=False)

    def __post_init__(self):
        _rule(self.postselect)
        n = 3 * (self.n_logical + 1) + 1
        self.circuit = Circuit(n, name=f"logical-{self.n_logical}")
        self.blocks = [CodeBlock((3 * k, 3 * k + 1, 3 * k + 2)) for k in range(self.n_logical)]
        k = self.n_logical
        self.free = CodeBlock((3 * k, 3 * k + 1, 3 * k + 2))
        self.ancilla = n - 1

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    def _swap_in(self, target: int, out: GadgetOutcome) -> None:
        new = out.output_blocks[0]
        if new != self.blocks[target]:
            self.free, self.blocks[target] = self.blocks[target], new

    def error_correct(self, target: int) -> None:
        from .repcode import error_correct
        error_correct(self.circuit, self.blocks[target], self.ancilla, self.ec_rounds)

    def apply(self, op: LogicalOpSpec | str, *targets: int, theta: Optional[float] = None) -> None:
        if isinstance(op, str):
            op = LogicalOpSpec(op, targets, theta)
        c, blk, ps = self.circuit, [self.blocks[t] for t in op.targets], self.postselect
        k = op.kind
        if k in ("X_L", "Y_L", "Z_L"):
            logical_pauli(c, k[0], blk[0])
        elif k == "CNOT_L":
            logical_cnot(c, blk[0], blk[1])
        elif k == "CZ_L":
            logical_cz(c, blk[0], blk[1], self.ancilla, ps)
        elif k in ("S_L", "Sdg_L"):
            out = s_teleport(c, blk[0], self.free, self.ancilla, 1 if k == "S_L" else -1, ps)
            self._swap_in(op.targets[0], out)
        elif k == "H_L":
            out = h_teleport(c, blk[0], self.free, self.ancilla, ps)
            self._swap_in(op.targets[0], out)
            if self.ec_after_h:
                self.error_correct(op.targets[0])
        elif k == "Rz_L":
            rz_gadget(c, blk[0], self.free, self.ancilla, op.theta, ps)
        elif k in ("Rx_L", "Ry_L"):
            for step in rotation_decompose(k[:2], op.theta):
                if isinstance(step, tuple):
                    self.apply(step[0], op.targets[0], theta=step[1])
                else:
                    self.apply(step, op.targets[0])
        elif k == "PrepPlus":
            prep_plus(c, blk[0])
        elif k in ("PrepPlusI", "PrepMinusI"):
            prep_plus_i(c, blk[0], self.ancilla, 1 if k == "PrepPlusI" else -1, ps)
        elif k == "MeasX_L":
            measure_x_logical(c, blk[0], self.ancilla)
        else:  # pragma: no cover - LogicalOpSpec validates kinds
            raise ValueError(k)

    def readout_keys(self) -> list[tuple[str, ...]]:
        """Append transversal Z readout of every logical qubit; returns keys per qubit."""
        return [measure_z_logical(self.circuit, b).outcome_keys for b in self.blocks]


# ---------------------------------------------------------------- catalog

GADGET_QUBITS = {
    "X_L": 3, "Y_L": 3, "Z_L": 3, "CNOT_L": 6, "prep_plus": 3, "prep_plus_i": 4,
    "CZ_L": 7, "MeasX_L": 4, "S_L": 7, "H_L": 7, "Rz_L": 7,
}


def build_gadget(name: str, theta: float = math.pi / 7, postselect: str = DEFAULT_POSTSELECT) -> tuple[Circuit, GadgetOutcome, tuple[CodeBlock, ...]]:
    """Stand-alone circuit for a named gadget: (circuit, outcome, input blocks)."""
    b0, b1 = CodeBlock((0, 1, 2)), CodeBlock((3, 4, 5))
    anc = 6
    if name not in GADGET_QUBITS:
        raise ValueError(f"unknown gadget {name!r}")
    c = Circuit(GADGET_QUBITS[name], name=name)
    if name in ("X_L", "Y_L", "Z_L"):
        return c, logical_pauli(c, name[0], b0), (b0,)
    if name == "CNOT_L":
        return c, logical_cnot(c, b0, b1), (b0, b1)
    if name == "prep_plus":
        return c, prep_plus(c, b0), ()
    if name == "prep_plus_i":
        return c, prep_plus_i(c, b0, 3, +1, postselect), ()
    if name == "CZ_L":
        return c, logical_cz(c, b0, b1, anc, postselect), (b0, b1)
    if name == "MeasX_L":
        return c, measure_x_logical(c, b0, 3), (b0,)
    if name == "S_L":
        return c, s_teleport(c, b0, b1, anc, +1, postselect), (b0,)
    if name == "H_L":
        return c, h_teleport(c, b0, b1, anc, postselect), (b0,)
    return c, rz_gadget(c, b0, b1, anc, theta, postselect), (b0,)


def catalog() -> list[dict]:
    """Name, physical qubit count and fault-site count of every gadget."""
    rows = []
    for name in GADGET_QUBITS:
        c, _, _ = build_gadget(name)
        one, two = c.gate_count()
        rows.append({"name": name, "qubits": c.n_qubits, "fault_sites": one + 2 * two})
    return rows


def catalog_json() -> str:
    return json.dumps(catalog(), indent=2)
