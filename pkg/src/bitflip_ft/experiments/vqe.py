"""Two-qubit VQE: noiseless parameter optimization, noisy grouped energy estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from ..circuit import Circuit
from ..engines import DensityEngine
from ..gadgets import DEFAULT_POSTSELECT, LogicalRegister
from ..gates import CZ, H, Ry, Sdg
from ..noise import NoiseSpec
from ..pauli import PauliString
from .common import VARIANTS, check_variant, decoded_distribution, rng_for, sample_counts, \
    sample_raw_shots


@dataclass(frozen=True)
class ObservableSpec:
    """Real-weighted Pauli sum plus an identity offset, with a measurement grouping."""

    terms: tuple[tuple[float, PauliString], ...]
    groups: tuple[tuple[int, ...], ...]
    identity: float = 0.0

    def __post_init__(self):
        seen = sorted(i for g in self.groups for i in g)
        if seen != list(range(len(self.terms))):
            raise ValueError("groups must partition the term indices")
        for c, P in self.terms:
            if not isinstance(c, (int, float)) or P.phase != 1 or P.is_identity():
                raise ValueError("terms need real coefficients and non-identity Hermitian strings")
        for g in self.groups:
            group_basis(self, g)

    def matrix(self, n_qubits: int = 2) -> np.ndarray:
        out = self.identity * np.eye(1 << n_qubits, dtype=complex)
        for c, P in self.terms:
            out = out + c * P.matrix(n_qubits)
        return out


def group_basis(obs: ObservableSpec, group: Sequence[int]) -> dict[int, str]:
    """Shared measurement letter per qubit; raises if the group is not qubit-wise compatible."""
    basis: dict[int, str] = {}
    for i in group:
        for q, s in obs.terms[i][1].letters.items():
            if basis.setdefault(q, s) != s:
                raise ValueError(f"group {tuple(group)} is not qubit-wise compatible on qubit {q}")
    return basis


def _p(label: str) -> PauliString:
    return PauliString.from_label(label)


# active-space two-qubit Hamiltonian (hartree)
CAFFEINE = ObservableSpec(
    terms=(
        (-0.1532273887412754, _p("Z0")),
        (-0.1532273887412754, _p("Z1")),
        (0.025969183085931477, _p("Z0 Z1")),
        (-0.013168856506009949, _p("X0")),
        (0.013169112223348517, _p("X0 Z1")),
        (0.013168856506009949, _p("X1")),
        (-0.013169112223348517, _p("Z0 X1")),
        (-0.050192647768994174, _p("Y0 Y1")),
    ),
    groups=((0, 1, 2), (3, 4), (5, 6), (7,)),
    identity=-667.4554308557676,
)


def exact_ground_energy(obs: ObservableSpec = CAFFEINE) -> float:
    return float(np.linalg.eigvalsh(obs.matrix())[0])


# ---------------------------------------------------------------- noiseless ansatz

def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def ansatz_state(theta: Sequence[float]) -> np.ndarray:
    """Ry(t1) x Ry(t2), CZ, Ry(t3) x Ry(t4) on |00>; qubit 0 is the low bit."""
    t1, t2, t3, t4 = theta
    psi = np.kron(_ry(t2), _ry(t1))[:, 0]
    psi = np.diag([1.0, 1.0, 1.0, -1.0]) @ psi
    return np.kron(_ry(t4), _ry(t3)) @ psi


def ansatz_energy(theta: Sequence[float], obs: ObservableSpec = CAFFEINE) -> float:
    psi = ansatz_state(theta)
    return float(np.real(psi @ obs.matrix() @ psi))


@dataclass(frozen=True)
class OptimizationResult:
    theta: np.ndarray
    energy: float
    converged: bool
    starts: int


def optimize_ansatz(obs: ObservableSpec = CAFFEINE, initial: Optional[Sequence[float]] = None,
                    tolerance: float = 1e-10, restarts: int = 5, seed: int = 0,
                    max_evals: int = 20_000) -> OptimizationResult:
    """Derivative-free minimization of the exact ansatz energy, best over several starts."""
    rng = rng_for(seed, 0)
    starts = [np.asarray(initial, dtype=float)] if initial is not None else []
    while len(starts) < restarts:
        starts.append(rng.uniform(-math.pi, math.pi, 4))
    best, ok = None, False
    for x0 in starts:
        r = minimize(ansatz_energy, x0, args=(obs,), method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": tolerance, "maxfev": max_evals})
        r = minimize(ansatz_energy, r.x, args=(obs,), method="Powell",
                     options={"xtol": 1e-10, "ftol": tolerance, "maxfev": max_evals})
        if best is None or r.fun < best.fun:
            best, ok = r, bool(r.success)
    return OptimizationResult(np.asarray(best.x), float(best.fun), ok, len(starts))


def energy_gradient(theta: Sequence[float], obs: ObservableSpec = CAFFEINE, step: float = 1e-6) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = step
        g[k] = (ansatz_energy(theta + e, obs) - ansatz_energy(theta - e, obs)) / (2 * step)
    return g


# ---------------------------------------------------------------- noisy estimation

def _basis_change_physical(c: Circuit, basis: dict[int, str]) -> None:
    for q, s in basis.items():
        if s == "Y":
            c.gate(Sdg(q))
        if s in ("X", "Y"):
            c.gate(H(q))


def measurement_circuit(theta: Sequence[float], basis: dict[int, str], variant: str,
                        postselect: str = DEFAULT_POSTSELECT) -> tuple[Circuit, list[tuple[int, ...]]]:
    """Ansatz followed by the basis change for one group; returns circuit and readout qubits."""
    check_variant(variant)
    t1, t2, t3, t4 = theta
    if variant == "bare":
        c = Circuit(2, name="vqe-bare")
        c.gate(Ry(0, t1)).gate(Ry(1, t2)).gate(CZ(0, 1)).gate(Ry(0, t3)).gate(Ry(1, t4))
        _basis_change_physical(c, basis)
        return c, [(0,), (1,)]
    reg = LogicalRegister(2, postselect=postselect, ec_after_h=variant == "encoded_with_EC")
    reg.apply("Ry_L", 0, theta=t1)
    reg.apply("Ry_L", 1, theta=t2)
    reg.apply("CZ_L", 0, 1)
    reg.apply("Ry_L", 0, theta=t3)
    reg.apply("Ry_L", 1, theta=t4)
    for q, s in basis.items():
        if s == "Y":
            reg.apply("Sdg_L", q)
        if s in ("X", "Y"):
            reg.apply("H_L", q)
    return reg.circuit, [b.qubits for b in reg.blocks]


@dataclass(frozen=True)
class GroupEstimate:
    group: tuple[int, ...]
    value: float
    stderr: float
    exact: float  # expectation under the exact noisy accepted distribution
    accepted: int
    raw: int


@dataclass(frozen=True)
class EnergyEstimate:
    variant: str
    epsilon: float
    energy: float
    stderr: float
    exact: float
    groups: tuple[GroupEstimate, ...]

    @property
    def accepted_shots(self) -> int:
        return sum(g.accepted for g in self.groups)

    @property
    def raw_shots(self) -> int:
        return sum(g.raw for g in self.groups)

    def row(self) -> dict:
        return {"variant": self.variant, "epsilon": self.epsilon, "energy": self.energy,
                "stderr": self.stderr, "accepted_shots": self.accepted_shots, "raw_shots": self.raw_shots}


VQE_COLUMNS = ("variant", "epsilon", "energy", "stderr", "accepted_shots", "raw_shots")


def _parities(obs: ObservableSpec, group: Sequence[int]) -> np.ndarray:
    """Row t, column outcome: eigenvalue of term t on that logical outcome (after the basis change)."""
    idx = np.arange(4)
    rows = []
    for i in group:
        par = np.zeros(4, dtype=np.int64)
        for q in obs.terms[i][1].letters:
            par ^= (idx >> q) & 1
        rows.append(1 - 2 * par)
    return np.array(rows, dtype=float)


def group_distribution(theta: Sequence[float], basis: dict[int, str], variant: str,
                       noise: NoiseSpec, postselect: str = DEFAULT_POSTSELECT) -> tuple[np.ndarray, float]:
    """Exact accepted logical-outcome distribution and acceptance probability."""
    c, readout = measurement_circuit(theta, basis, variant, postselect)
    eng = DensityEngine(c.n_qubits, noise).run(c)
    acc = eng.acceptance()
    return decoded_distribution(eng.diagonal(), readout) / acc, acc


def vqe_energy(theta: Sequence[float], variant: str, shots: int, noise: NoiseSpec, seed: int,
               obs: ObservableSpec = CAFFEINE, stream: Sequence[int] = (),
               postselect: str = DEFAULT_POSTSELECT) -> EnergyEstimate:
    """Grouped energy estimate with ``shots`` accepted shots per group."""
    if shots < 1:
        raise ValueError("shots must be positive")
    vid = VARIANTS.index(check_variant(variant))
    coeffs = np.array([c for c, _ in obs.terms])
    total, var, exact, out = obs.identity, 0.0, obs.identity, []
    for g, group in enumerate(obs.groups):
        dist, acc = group_distribution(theta, group_basis(obs, group), variant, noise, postselect)
        rng = rng_for(seed, *stream, vid, g)
        counts = sample_counts(dist, shots, rng)
        per_outcome = coeffs[list(group)] @ _parities(obs, group)  # group energy per outcome
        mean = counts @ per_outcome / shots
        v = counts @ (per_outcome - mean) ** 2 / max(shots - 1, 1) / shots
        ex = float(dist @ per_outcome)
        raw = sample_raw_shots(shots, min(acc, 1.0), rng)
        out.append(GroupEstimate(tuple(group), float(mean), math.sqrt(v), ex, shots, raw))
        total += mean
        var += v
        exact += ex
    return EnergyEstimate(variant, noise.epsilon, float(total), math.sqrt(var), float(exact), tuple(out))


def epsilon_sweep(theta: Sequence[float], epsilons: Sequence[float], p: float,
                  variants: Sequence[str], shots: int, seed: int,
                  obs: ObservableSpec = CAFFEINE) -> list[EnergyEstimate]:
    """``vqe_energy`` for every (epsilon, variant) pair; stream keys keep the pairs independent."""
    out = []
    for k, eps in enumerate(epsilons):
        if not 0 <= eps <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        for v in variants:
            out.append(vqe_energy(theta, v, shots, NoiseSpec(p, eps), seed, obs, stream=(k,)))
    return out
