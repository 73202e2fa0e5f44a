"""Circuit executors.

Three engines run the same :class:`~bitflip_ft.circuit.Circuit` objects:

* :class:`DensityEngine` evolves the exact density matrix, splitting into one
  branch per distinct measurement record still needed by later instructions.
  It is the verification oracle and also serves the experiments that need
  exact noisy expectations.
* :class:`TrajectoryEngine` samples shots in batches of pure states with
  Pauli faults drawn after each gate.
* :class:`BitEngine` handles circuits whose gates keep basis states as basis
  states, tracking only bit strings per shot.

Engines are plain objects holding their own state; nothing is shared.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import _sparse as SP
from . import _kernels as K
from .circuit import Circuit, Cond, Measure, Op, Postselect, Reset
from .gates import gate_matrix
from .noise import NOISELESS, NoiseSpec
from .pauli import PauliString
from .states import DensityMatrix, StateVector

DENSITY_CAPACITY = 12
_DROP = 1e-13


class CapacityError(ValueError):
    pass


class ZeroAcceptance(RuntimeError):
    """Every branch was rejected at a postselection checkpoint."""


# ---------------------------------------------------------------- density

class DensityEngine:
    """Exact mixed-state evolution with classical branching.

    ``branches`` maps a measurement record (sorted tuple of ``(key, bit)``) to
    the unnormalised density matrix for that record, stored sparsely. The total
    trace is the probability of not having been discarded so far.
    """

    def __init__(self, n_qubits: int, noise: NoiseSpec = NOISELESS,
                 rho: Optional[DensityMatrix] = None, keep_records: bool = False):
        if n_qubits > DENSITY_CAPACITY:
            raise CapacityError(f"density engine is capped at {DENSITY_CAPACITY} qubits")
        self.n = n_qubits
        self.noise = noise
        self.keep_records = keep_records
        if rho is None:
            rho = DensityMatrix.zero(n_qubits)
        if rho.n_qubits != n_qubits:
            raise ValueError("initial state has the wrong size")
        self.branches: dict[tuple, SP.SparseRho] = {(): SP.SparseRho.from_dense(n_qubits, rho.entries)}
        self.discarded = 0.0

    # -- bookkeeping
    def trace(self, v: SP.SparseRho) -> float:
        return v.trace()

    def acceptance(self) -> float:
        return sum(v.trace() for v in self.branches.values())

    def density(self, normalize: bool = True) -> DensityMatrix:
        dim = 1 << self.n
        m = np.zeros((dim, dim), dtype=complex)
        for v in self.branches.values():
            m += v.to_dense()
        if normalize:
            tr = np.trace(m).real
            if tr <= 0:
                raise ZeroAcceptance("no accepted weight left")
            m = m / tr
        return DensityMatrix(self.n, m)

    def branch_density(self, record: tuple) -> DensityMatrix:
        return DensityMatrix(self.n, self.branches[record].to_dense())

    def diagonal(self) -> np.ndarray:
        """Unnormalised basis-state probabilities summed over branches."""
        dim = 1 << self.n
        out = np.zeros(dim)
        for v in self.branches.values():
            rows, cols = v.idx >> self.n, v.idx & (dim - 1)
            d = rows == cols
            np.add.at(out, cols[d], v.val[d].real)
        return out

    # -- primitive actions on one branch
    def _gate(self, v, g):
        k, qs = g.kind, g.qubits
        if k == "CNOT":
            return SP.cnot(v, qs[0], qs[1])
        if k == "CZ":
            return SP.cz(v, qs[0], qs[1])
        if k in ("X", "Y", "Z"):
            return SP.pauli(v, qs[0], k)
        u = gate_matrix(k, g.theta)
        if u[0, 1] == 0 and u[1, 0] == 0:
            return SP.diagonal(v, qs[0], u[0, 0], u[1, 1])
        return SP.unitary(v, qs[0], u)

    def _pauli(self, v, letter, q):
        return SP.pauli(v, q, letter)

    def _noisy_gate(self, v, g):
        v = self._gate(v, g)
        if self.noise.gates_noisy:
            for q in g.qubits:
                v = SP.channel(v, q, self.noise.weights)
        return v

    def _inject(self, v, pauli: PauliString):
        for q, s in pauli.letters.items():
            v = self._pauli(v, s, q)
        return v

    # -- circuit execution
    def run(self, circuit: Circuit, fault: Optional[tuple[int, PauliString]] = None,
            strict: bool = True) -> "DensityEngine":
        """Execute ``circuit``; ``fault=(i, P)`` injects ``P`` right after instruction ``i``.

        With ``strict=False`` a run whose every branch is rejected simply ends
        with no branches instead of raising :class:`ZeroAcceptance`.
        """
        if circuit.n_qubits > self.n:
            raise CapacityError("circuit is wider than the engine register")
        last_use = circuit.last_use()
        for i, ins in enumerate(circuit.instructions):
            inject = fault[1] if fault is not None and fault[0] == i else None
            self._step(ins, inject)
            if not self.keep_records:
                self._merge(lambda k: last_use.get(k, -1) > i)
            if not self.branches:
                if strict:
                    raise ZeroAcceptance(f"all weight discarded at instruction {i}")
                return self
        if not self.keep_records:
            self._merge(lambda k: False)
        return self

    def _step(self, ins, inject):
        new: dict[tuple, SP.SparseRho] = {}
        if isinstance(ins, Op):
            for rec, v in self.branches.items():
                v = self._noisy_gate(v, ins.gate)
                new[rec] = self._inject(v, inject) if inject is not None else v
        elif isinstance(ins, Cond):
            for rec, v in self.branches.items():
                if ins.condition.evaluate(dict(rec)):
                    v = self._noisy_gate(v, ins.gate)
                    if inject is not None:
                        v = self._inject(v, inject)
                new[rec] = v
        elif isinstance(ins, Reset):
            q = ins.qubit
            for rec, v in self.branches.items():
                v = SP.reset(v, q)
                if self.noise.noisy_prep and self.noise.p > 0:
                    p = self.noise.p
                    v = SP.add(v.scaled(1 - p), SP.pauli(v, q, "X").scaled(p))
                new[rec] = v
        elif isinstance(ins, Measure):
            q = ins.qubit
            for rec, v in self.branches.items():
                for bit in (0, 1):
                    w = SP.project(v, q, bit)
                    if w.trace() > _DROP:
                        key = tuple(sorted(rec + ((ins.key, bit),)))
                        new[key] = w
        elif isinstance(ins, Postselect):
            for rec, v in self.branches.items():
                if ins.condition.evaluate(dict(rec)):
                    new[rec] = v
                else:
                    self.discarded += v.trace()
        else:
            raise TypeError(f"unsupported instruction {ins!r}")
        self.branches = new

    def _merge(self, alive):
        if all(alive(k) for rec in self.branches for k, _ in rec):
            return
        merged: dict[tuple, SP.SparseRho] = {}
        for rec, v in self.branches.items():
            key = tuple((k, b) for k, b in rec if alive(k))
            merged[key] = SP.add(merged[key], v) if key in merged else v
        self.branches = merged


def evolve_density(rho: DensityMatrix, circuit: Circuit,
                   noise: NoiseSpec = NOISELESS) -> tuple[DensityMatrix, float]:
    """Run ``circuit`` on ``rho``; returns the normalised accepted state and its acceptance probability."""
    eng = DensityEngine(rho.n_qubits, noise, rho).run(circuit)
    acc = eng.acceptance()
    if acc <= 0:
        raise ZeroAcceptance("zero acceptance probability")
    return eng.density(), acc


# ---------------------------------------------------------------- trajectories

class TrajectoryEngine:
    """A batch of pure-state trajectories with sampled Pauli faults.

    Rejected shots are removed from the batch at each postselection checkpoint;
    ``raw`` counts the shots started and ``len(self)`` the survivors.
    """

    def __init__(self, n_qubits: int, shots: int, noise: NoiseSpec, rng: np.random.Generator,
                 state: Optional[StateVector] = None):
        self.n = n_qubits
        self.noise = noise
        self.rng = rng
        init = StateVector.zero(n_qubits) if state is None else state
        self.v = np.tile(init.amplitudes, (shots, 1))
        self.records: dict[str, np.ndarray] = {}
        self.raw = shots
        self.shot_ids = np.arange(shots)

    def __len__(self) -> int:
        return self.v.shape[0]

    def _fault_rows(self, rows: np.ndarray, q: int) -> None:
        if len(rows) == 0 or not self.noise.gates_noisy:
            return
        draws = self.rng.random(len(rows))
        wi, wx, wy, wz = self.noise.weights
        edges = np.cumsum([wi, wx, wy])
        letters = np.searchsorted(edges, draws, side="right")  # 0=I 1=X 2=Y 3=Z
        for code, s in ((1, "X"), (2, "Y"), (3, "Z")):
            hit = rows[letters == code]
            if len(hit):
                self.v[hit] = K.apply_gate(self.v[hit], s, (q,))

    def _gate_rows(self, g, rows: Optional[np.ndarray]) -> None:
        if rows is None:
            self.v = K.apply_gate(self.v, g.kind, g.qubits, g.theta)
            rows = np.arange(len(self))
        elif len(rows):
            self.v[rows] = K.apply_gate(self.v[rows], g.kind, g.qubits, g.theta)
        for q in g.qubits:
            self._fault_rows(rows, q)

    def _measure(self, q: int) -> np.ndarray:
        p1 = np.clip(K.prob_one(self.v, q), 0.0, 1.0)
        draws = self.rng.random(len(self))
        bits = (draws >= 1.0 - p1).astype(np.int64)
        w = K.project(self.v, q, bits)
        norms = np.linalg.norm(w, axis=1)
        self.v = w / norms[:, None]
        return bits

    def run(self, circuit: Circuit) -> "TrajectoryEngine":
        for ins in circuit.instructions:
            if len(self) == 0:
                break
            if isinstance(ins, Op):
                self._gate_rows(ins.gate, None)
            elif isinstance(ins, Cond):
                rows = np.nonzero(ins.condition.evaluate(self.records))[0]
                self._gate_rows(ins.gate, rows)
            elif isinstance(ins, Measure):
                self.records[ins.key] = self._measure(ins.qubit)
            elif isinstance(ins, Reset):
                bits = self._measure(ins.qubit)
                rows = np.nonzero(bits)[0]
                if len(rows):
                    self.v[rows] = K.flip(self.v[rows], ins.qubit)
                if self.noise.noisy_prep and self.noise.p > 0:
                    rows = np.nonzero(self.rng.random(len(self)) < self.noise.p)[0]
                    if len(rows):
                        self.v[rows] = K.flip(self.v[rows], ins.qubit)
            elif isinstance(ins, Postselect):
                keep = ins.condition.evaluate(self.records)
                self._keep(keep)
            else:
                raise TypeError(f"unsupported instruction {ins!r}")
        return self

    def _keep(self, keep: np.ndarray) -> None:
        self.v = self.v[keep]
        self.shot_ids = self.shot_ids[keep]
        self.records = {k: r[keep] for k, r in self.records.items()}

    def drop_records(self) -> None:
        self.records = {}

    def probabilities(self) -> np.ndarray:
        return np.abs(self.v) ** 2

    def sample_bits(self) -> np.ndarray:
        """One computational-basis sample per surviving shot, as basis indices."""
        probs = self.probabilities()
        cdf = np.cumsum(probs, axis=1)
        draws = self.rng.random(len(self)) * cdf[:, -1]
        return (cdf < draws[:, None]).sum(axis=1)


class BitEngine:
    """Shots of basis states under Pauli faults, for circuits of permutation and phase gates.

    Phases are dropped: a basis state only ever picks up a global phase here.
    """

    _PHASE_ONLY = {"Z", "S", "Sdg", "CZ", "Rz"}

    def __init__(self, n_qubits: int, shots: int, noise: NoiseSpec, rng: np.random.Generator):
        self.n = n_qubits
        self.noise = noise
        self.rng = rng
        self.bits = np.zeros((shots, n_qubits), dtype=np.uint8)
        self.records: dict[str, np.ndarray] = {}
        self.raw = shots
        self.shot_ids = np.arange(shots)

    def __len__(self) -> int:
        return self.bits.shape[0]

    def _fault(self, rows, q):
        if not self.noise.gates_noisy:
            return
        wi, wx, wy, _ = self.noise.weights
        draws = self.rng.random(len(rows))
        # X and Y both flip the bit; Z only changes a phase
        hit = rows[(draws >= wi) & (draws < wi + wx + wy)]
        self.bits[hit, q] ^= 1

    def _gate(self, g, rows):
        k = g.kind
        if k in ("X", "Y"):
            self.bits[rows, g.qubits[0]] ^= 1
        elif k == "CNOT":
            c, t = g.qubits
            self.bits[rows, t] ^= self.bits[rows, c]
        elif k not in self._PHASE_ONLY:
            raise ValueError(f"{k} is not a basis-preserving gate")
        for q in g.qubits:
            self._fault(rows, q)

    def run(self, circuit: Circuit) -> "BitEngine":
        every = slice(None)
        for ins in circuit.instructions:
            if isinstance(ins, Op):
                self._gate(ins.gate, np.arange(len(self)))
            elif isinstance(ins, Cond):
                rows = np.nonzero(ins.condition.evaluate(self.records))[0]
                self._gate(ins.gate, rows)
            elif isinstance(ins, Measure):
                self.records[ins.key] = self.bits[every, ins.qubit].astype(np.int64)
            elif isinstance(ins, Reset):
                self.bits[:, ins.qubit] = 0
                if self.noise.noisy_prep and self.noise.p > 0:
                    self.bits[:, ins.qubit] = self.rng.random(len(self)) < self.noise.p
            elif isinstance(ins, Postselect):
                keep = ins.condition.evaluate(self.records)
                self.bits = self.bits[keep]
                self.shot_ids = self.shot_ids[keep]
                self.records = {k: r[keep] for k, r in self.records.items()}
            else:
                raise TypeError(f"unsupported instruction {ins!r}")
        return self

    def drop_records(self) -> None:
        self.records = {}
