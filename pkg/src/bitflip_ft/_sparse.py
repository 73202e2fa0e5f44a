"""Sparse vectorised density matrices.

A density matrix on ``n`` qubits is stored as parallel arrays of flat indices
and values. Bit ``q`` of an index is column qubit ``q`` and bit ``q + n`` is row
qubit ``q`` (the layout of :mod:`bitflip_ft._kernels`). Circuits in this
package keep most qubits in |0> most of the time, so the nonzero count stays
far below ``4**n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TINY = 1e-18


@dataclass
class SparseRho:
    n: int
    idx: np.ndarray  # int64
    val: np.ndarray  # complex128

    @classmethod
    def from_dense(cls, n: int, m: np.ndarray) -> "SparseRho":
        flat = np.asarray(m, dtype=complex).reshape(-1)
        nz = np.flatnonzero(flat)
        return cls(n, nz.astype(np.int64), flat[nz].copy())

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n
        out = np.zeros(dim * dim, dtype=complex)
        np.add.at(out, self.idx, self.val)
        return out.reshape(dim, dim)

    @property
    def nnz(self) -> int:
        return self.idx.size

    def trace(self) -> float:
        mask = (1 << self.n) - 1
        diag = (self.idx >> self.n) == (self.idx & mask)
        return float(self.val[diag].real.sum())

    def scaled(self, c: float) -> "SparseRho":
        return SparseRho(self.n, self.idx, self.val * c)


def combine(n: int, idx: np.ndarray, val: np.ndarray) -> SparseRho:
    """Sum duplicate indices and drop negligible entries."""
    if idx.size == 0:
        return SparseRho(n, idx.astype(np.int64), val.astype(complex))
    order = np.argsort(idx, kind="stable")
    idx, val = idx[order], val[order]
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    idx = idx[starts]
    val = np.add.reduceat(val, starts)
    keep = np.abs(val) > _TINY
    return SparseRho(n, idx[keep], val[keep])


def add(a: SparseRho, b: SparseRho) -> SparseRho:
    return combine(a.n, np.concatenate([a.idx, b.idx]), np.concatenate([a.val, b.val]))


def _bits(rho: SparseRho, q: int):
    return (rho.idx >> (q + rho.n)) & 1, (rho.idx >> q) & 1


def _mask(rho: SparseRho, q: int) -> int:
    return (1 << (q + rho.n)) | (1 << q)


def _sign(rho: SparseRho, q: int) -> np.ndarray:
    r, c = _bits(rho, q)
    return np.where(r == c, 1.0, -1.0)


def pauli(rho: SparseRho, q: int, letter: str) -> SparseRho:
    """P rho P on qubit ``q``."""
    if letter == "Z":
        return SparseRho(rho.n, rho.idx, rho.val * _sign(rho, q))
    val = rho.val * _sign(rho, q) if letter == "Y" else rho.val
    return SparseRho(rho.n, rho.idx ^ _mask(rho, q), val)


def channel(rho: SparseRho, q: int, weights) -> SparseRho:
    """Single-qubit Pauli channel with weights (I, X, Y, Z)."""
    wi, wx, wy, wz = weights
    s = _sign(rho, q)
    stay = rho.val * (wi + wz * s)
    move = rho.val * (wx + wy * s)
    if not move.any():
        return SparseRho(rho.n, rho.idx, stay)
    return combine(rho.n, np.concatenate([rho.idx, rho.idx ^ _mask(rho, q)]),
                   np.concatenate([stay, move]))


def diagonal(rho: SparseRho, q: int, d0: complex, d1: complex) -> SparseRho:
    r, c = _bits(rho, q)
    d = np.array([d0, d1])
    return SparseRho(rho.n, rho.idx, rho.val * d[r] * np.conj(d[c]))


def unitary(rho: SparseRho, q: int, u: np.ndarray) -> SparseRho:
    """U rho U^dagger for a dense 2x2 ``u``."""
    n = rho.n
    rb, cb = q + n, q
    r, c = _bits(rho, q)
    base = rho.idx & ~((1 << rb) | (1 << cb))
    idx, val = [], []
    uc = np.conj(u)
    for r2 in (0, 1):
        for c2 in (0, 1):
            coef = u[r2, r] * uc[c2, c]
            idx.append(base | (r2 << rb) | (c2 << cb))
            val.append(rho.val * coef)
    return combine(n, np.concatenate(idx), np.concatenate(val))


def cnot(rho: SparseRho, control: int, target: int) -> SparseRho:
    n, i = rho.n, rho.idx
    i = i ^ (((i >> (control + n)) & 1) << (target + n))
    i = i ^ (((i >> control) & 1) << target)
    return SparseRho(n, i, rho.val)


def cz(rho: SparseRho, a: int, b: int) -> SparseRho:
    n, i = rho.n, rho.idx
    s = ((i >> (a + n)) & (i >> (b + n)) & 1) ^ ((i >> a) & (i >> b) & 1)
    return SparseRho(n, i, np.where(s == 1, -rho.val, rho.val))


def project(rho: SparseRho, q: int, bit: int) -> SparseRho:
    r, c = _bits(rho, q)
    keep = (r == bit) & (c == bit)
    return SparseRho(rho.n, rho.idx[keep], rho.val[keep])


def reset(rho: SparseRho, q: int) -> SparseRho:
    """Trace out qubit ``q`` and re-prepare it in |0>."""
    r, c = _bits(rho, q)
    keep = r == c
    return combine(rho.n, rho.idx[keep] & ~_mask(rho, q), rho.val[keep])
