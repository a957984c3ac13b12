"""Dense exact-evolution reference for small chains.

Up to ``DENSE_LIMIT`` qubits Pauli sums are assembled as dense matrices
from Kronecker products and propagated by full diagonalization.  Between
that and ``MAX_QUBITS`` a matrix-free operator acting on basis indices
with bit operations is used together with
:func:`scipy.sparse.linalg.expm_multiply`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.sparse.linalg import LinearOperator, expm_multiply

from .mps import PAULI_MATRICES
from .pauli import PauliString, PauliSum

__all__ = [
    "DenseState",
    "pauli_matrix",
    "densify",
    "PauliSumOperator",
    "apply_pauli",
    "exact_evolve",
    "exact_expect",
    "basis_state",
    "spectrum",
    "DENSE_LIMIT",
    "MAX_QUBITS",
]

DENSE_LIMIT = 10
MAX_QUBITS = 14


@dataclass
class DenseState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits > MAX_QUBITS:
            raise MemoryError(f"dense states are limited to {MAX_QUBITS} qubits")
        if self.amplitudes.shape[0] != 2**self.n_qubits:
            raise ValueError("amplitude vector has the wrong length")


def basis_state(bits) -> DenseState:
    bits = [int(b) for b in bits]
    psi = np.zeros(2 ** len(bits), complex)
    psi[int("".join(map(str, bits)), 2)] = 1.0
    return DenseState(len(bits), psi)


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of ``p`` as a Kronecker product (site 0 leftmost)."""
    return p.sign * reduce(np.kron, [PAULI_MATRICES[c] for c in p.codes])


class PauliSumOperator(LinearOperator):
    """Matrix-free Pauli sum: ``P|b> = s i^(x.z) (-1)^|b & z| |b ^ x>``.

    Terms sharing an X-mask are merged into one phase vector, so memory is
    one complex vector per distinct mask.
    """

    def __init__(self, h: PauliSum):
        n = h.n_qubits
        if n > MAX_QUBITS:
            raise MemoryError(f"oracle limited to {MAX_QUBITS} qubits, got {n}")
        dim = 2**n
        super().__init__(dtype=complex, shape=(dim, dim))
        idx = np.arange(dim, dtype=np.int64)
        weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)  # site 0 most significant
        groups: dict[int, np.ndarray] = {}
        for c, p in h.terms:
            xm = int(p.x.astype(np.int64) @ weights)
            zm = int(p.z.astype(np.int64) @ weights)
            parity = _popcount(idx & zm) & 1
            phase = c * (1j ** int(np.dot(p.x.astype(np.int64), p.z))) * (1 - 2 * parity)
            groups[xm] = groups.get(xm, 0) + phase
        self._idx = idx
        self._groups = [(xm, np.asarray(ph, dtype=complex)) for xm, ph in groups.items()]

    def _matvec(self, v):
        v = np.asarray(v).reshape(-1)
        out = np.zeros(self.shape[0], complex)
        for xm, ph in self._groups:
            out[self._idx ^ xm] += ph * v
        return out

    def _rmatvec(self, v):
        return self._matvec(v)  # Hermitian


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a >>= 1
    return count


def apply_pauli(p: PauliString, psi: np.ndarray) -> np.ndarray:
    return PauliSumOperator(PauliSum(p.n_qubits, [(1.0, p)])) @ psi


def densify(h: PauliSum):
    """Dense matrix of ``h`` (``n <= DENSE_LIMIT``) or a matrix-free operator above."""
    n = h.n_qubits
    if n > MAX_QUBITS:
        raise MemoryError(f"oracle limited to {MAX_QUBITS} qubits, got {n}")
    if n > DENSE_LIMIT:
        return PauliSumOperator(h)
    out = np.zeros((2**n, 2**n), complex)
    for c, p in h.terms:
        out += c * pauli_matrix(p)
    return out


def exact_evolve(h: PauliSum, psi0: DenseState, dt: float, steps: int) -> list[DenseState]:
    """States at ``t = 0, dt, ..., steps*dt`` under ``exp(-i h t)``."""
    if psi0.n_qubits != h.n_qubits:
        raise ValueError("size mismatch between Hamiltonian and state")
    out = [DenseState(psi0.n_qubits, psi0.amplitudes.copy())]
    if h.n_qubits <= DENSE_LIMIT:
        evals, evecs = np.linalg.eigh(densify(h))
        c0 = evecs.conj().T @ psi0.amplitudes
        for m in range(1, steps + 1):
            out.append(DenseState(h.n_qubits, evecs @ (np.exp(-1j * evals * m * dt) * c0)))
        return out
    op = PauliSumOperator(h)
    a = -1j * dt * op
    psi = psi0.amplitudes
    ident = h.as_dict().get("I" * h.n_qubits, 0.0)
    trace = -1j * dt * ident * 2**h.n_qubits
    for m in range(1, steps + 1):
        psi = expm_multiply(a, psi, traceA=trace)
        out.append(DenseState(h.n_qubits, psi))
    return out


def exact_expect(psi: DenseState, p: PauliString) -> float:
    if psi.n_qubits != p.n_qubits:
        raise ValueError("size mismatch between state and Pauli string")
    v = psi.amplitudes
    return float(np.vdot(v, apply_pauli(p, v)).real)


def spectrum(h: PauliSum) -> np.ndarray:
    """Sorted eigenvalues of ``h`` (dense, ``n <= DENSE_LIMIT``)."""
    if h.n_qubits > DENSE_LIMIT:
        raise MemoryError(f"dense spectra limited to {DENSE_LIMIT} qubits")
    return np.linalg.eigvalsh(densify(h))
