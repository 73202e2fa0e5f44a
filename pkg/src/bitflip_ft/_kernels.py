"""In-place-free array kernels on batches of little-endian state vectors.

Every kernel takes ``v`` of shape ``(B, 2**nbits)`` and returns a new array of
the same shape. A density matrix on ``n`` qubits is handled as a vector on
``2n`` bits: column qubit ``q`` is bit ``q``, row qubit ``q`` is bit ``q + n``.
"""

from __future__ import annotations

import numpy as np

from .gates import gate_matrix


def _view1(v: np.ndarray, bit: int) -> np.ndarray:
    b, dim = v.shape
    return v.reshape(b, dim >> (bit + 1), 2, 1 << bit)


def _view2(v: np.ndarray, bit_a: int, bit_b: int):
    """View with separate axes for two bits; returns (view, axis_a, axis_b)."""
    b, dim = v.shape
    hi, lo = max(bit_a, bit_b), min(bit_a, bit_b)
    view = v.reshape(b, dim >> (hi + 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    ax = {hi: 2, lo: 4}
    return view, ax[bit_a], ax[bit_b]


def _sl(axis: int, value, ndim: int = 6):
    idx = [slice(None)] * ndim
    idx[axis] = value
    return tuple(idx)


def apply_1q(v: np.ndarray, u: np.ndarray, bit: int) -> np.ndarray:
    w = _view1(v, bit)
    out = np.empty_like(w)
    a0, a1 = w[:, :, 0, :], w[:, :, 1, :]
    out[:, :, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    out[:, :, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return out.reshape(v.shape)


def flip(v: np.ndarray, bit: int) -> np.ndarray:
    """Pauli X on ``bit``."""
    return _view1(v, bit)[:, :, ::-1, :].reshape(v.shape)


def phase(v: np.ndarray, bit: int, ph0: complex, ph1: complex) -> np.ndarray:
    """Diagonal single-bit gate diag(ph0, ph1)."""
    w = _view1(v, bit).copy()
    if ph0 != 1:
        w[:, :, 0, :] *= ph0
    if ph1 != 1:
        w[:, :, 1, :] *= ph1
    return w.reshape(v.shape)


def cnot(v: np.ndarray, control: int, target: int) -> np.ndarray:
    w, ac, at = _view2(v, control, target)
    out = w.copy()
    sub = w[_sl(ac, 1)]
    # after removing the control axis, the target axis index may shift down by one
    at_sub = at - 1 if at > ac else at
    out[_sl(ac, 1)] = np.flip(sub, axis=at_sub)
    return out.reshape(v.shape)


def cz(v: np.ndarray, a: int, b: int) -> np.ndarray:
    w, aa, ab = _view2(v, a, b)
    out = w.copy()
    idx = [slice(None)] * 6
    idx[aa] = 1
    idx[ab] = 1
    out[tuple(idx)] *= -1
    return out.reshape(v.shape)


def prob_one(v: np.ndarray, bit: int) -> np.ndarray:
    """Per-row squared norm of the bit=1 half."""
    w = _view1(v, bit)[:, :, 1, :]
    return np.einsum("bij,bij->b", w, w.conj()).real


def project(v: np.ndarray, bit: int, outcome: np.ndarray) -> np.ndarray:
    """Zero the half with bit != outcome (per row); no renormalisation."""
    w = _view1(v, bit).copy()
    outcome = np.asarray(outcome).reshape(-1)
    keep1 = outcome.astype(bool)
    w[~keep1, :, 1, :] = 0
    w[keep1, :, 0, :] = 0
    return w.reshape(v.shape)


_DIAG = {"Z": (1, -1), "S": (1, 1j), "Sdg": (1, -1j)}


def apply_gate(v, kind, qubits, theta=None, shift=0, conj=False):
    """Apply a named gate to bits ``qubits + shift``; ``conj`` uses the complex conjugate matrix."""
    q = [x + shift for x in qubits]
    if kind == "X":
        return flip(v, q[0])
    if kind == "CNOT":
        return cnot(v, q[0], q[1])
    if kind == "CZ":
        return cz(v, q[0], q[1])
    if kind in _DIAG:
        p0, p1 = _DIAG[kind]
        if conj:
            p1 = np.conj(p1)
        return phase(v, q[0], p0, p1)
    if kind == "Rz":
        ph = np.exp(-0.5j * theta)
        if conj:
            ph = np.conj(ph)
        return phase(v, q[0], ph, np.conj(ph))
    if kind == "Y":
        out = flip(v, q[0])
        return phase(out, q[0], -1j, 1j) if not conj else phase(out, q[0], 1j, -1j)
    u = gate_matrix(kind, theta)
    if conj:
        u = u.conj()
    return apply_1q(v, u, q[0])


def reset_density(v: np.ndarray, row_bit: int, col_bit: int) -> np.ndarray:
    """Trace out a qubit and re-prepare it in |0> (vectorised density matrix)."""
    w, ar, ac = _view2(v, row_bit, col_bit)
    out = np.zeros_like(w)
    idx00 = [slice(None)] * 6
    idx11 = [slice(None)] * 6
    idx00[ar] = idx00[ac] = 0
    idx11[ar] = idx11[ac] = 1
    out[tuple(idx00)] = w[tuple(idx00)] + w[tuple(idx11)]
    return out.reshape(v.shape)
