"""Stabilizer tableaux for Clifford unitaries.

A :class:`CliffordTableau` on n qubits stores the images of the generators
``X_0 .. X_{n-1}, Z_0 .. Z_{n-1}`` under ``P -> C P C^dagger``.  Row ``i``
of ``symplectic`` is the image's bit vector ``(x_0..x_{n-1} | z_0..z_{n-1})``
and ``signs[i]`` is 1 when the image carries a minus sign.  A Pauli with bit
row vector ``v`` is mapped to bits ``v @ symplectic (mod 2)``.

Two-qubit gates are the workhorse of the cooling sweep.  The 720 positive
sign symplectic matrices of Sp(4, F2) are built from commutation
constraints, and every signed two-qubit tableau is paired with an explicit
H/S/CNOT word found by breadth-first search over the 11520-element group.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliString

__all__ = [
    "CliffordTableau",
    "TwoQubitGate",
    "conjugate_pauli",
    "conjugate_bits",
    "compose",
    "invert",
    "embed",
    "enumerate_two_qubit_positive",
    "two_qubit_candidates",
    "synthesize_unitary",
    "synthesize_circuit",
    "random_sign_pauli",
    "sign_pauli",
    "gate_tableau",
    "GATE_MATRICES",
]


def symplectic_form(n: int) -> np.ndarray:
    lam = np.zeros((2 * n, 2 * n), dtype=np.int64)
    lam[:n, n:] = np.eye(n, dtype=np.int64)
    lam[n:, :n] = np.eye(n, dtype=np.int64)
    return lam


def is_symplectic(m: np.ndarray) -> bool:
    n = m.shape[0] // 2
    lam = symplectic_form(n)
    m = m.astype(np.int64)
    return np.array_equal((m @ lam @ m.T) % 2, lam)


class CliffordTableau:
    """Clifford unitary as generator images; immutable."""

    __slots__ = ("n_qubits", "symplectic", "signs", "_cache")

    def __init__(self, symplectic, signs=None, check: bool = True):
        m = np.asarray(symplectic, dtype=np.uint8) % 2
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"symplectic part must be 2n x 2n, got shape {m.shape}")
        n = m.shape[0] // 2
        s = np.zeros(2 * n, np.uint8) if signs is None else np.asarray(signs, np.uint8) % 2
        if s.shape != (2 * n,):
            raise ValueError(f"expected {2 * n} sign bits, got shape {s.shape}")
        if __debug__ and check and not is_symplectic(m):
            raise ValueError("matrix does not preserve the symplectic form")
        m = m.copy()
        s = s.copy()
        m.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "symplectic", m)
        object.__setattr__(self, "signs", s)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("CliffordTableau is immutable")

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(np.eye(2 * n, dtype=np.uint8), check=False)

    @classmethod
    def from_pauli(cls, p: PauliString) -> "CliffordTableau":
        """Tableau of conjugation by the Pauli ``p`` (flips anticommuting generators)."""
        # X_j anticommutes with p iff z_j = 1, Z_j iff x_j = 1
        return cls(np.eye(2 * p.n_qubits, dtype=np.uint8), np.concatenate([p.z, p.x]), check=False)

    def is_identity(self) -> bool:
        return bool(
            np.array_equal(self.symplectic, np.eye(2 * self.n_qubits, dtype=np.uint8))
            and not self.signs.any()
        )

    def key(self) -> bytes:
        return self.symplectic.tobytes() + self.signs.tobytes()

    def to_hex(self) -> str:
        """``"<n>:<hex>"`` of the row-major symplectic bits followed by the sign bits."""
        bits = np.concatenate([self.symplectic.reshape(-1), self.signs])
        return f"{self.n_qubits}:{np.packbits(bits).tobytes().hex()}"

    @classmethod
    def from_hex(cls, text: str) -> "CliffordTableau":
        n_txt, hx = text.split(":")
        n = int(n_txt)
        count = 4 * n * n + 2 * n
        bits = np.unpackbits(np.frombuffer(bytes.fromhex(hx), np.uint8))[:count]
        return cls(bits[: 4 * n * n].reshape(2 * n, 2 * n), bits[4 * n * n :])

    def generator_images(self) -> list[PauliString]:
        n = self.n_qubits
        return [
            PauliString(row[:n], row[n:], -1 if s else 1)
            for row, s in zip(self.symplectic, self.signs)
        ]

    def _phase_data(self):
        c = self._cache
        if "phase" not in c:
            n = self.n_qubits
            m = self.symplectic.astype(np.int64)
            xr, zr = m[:, :n], m[:, n:]
            row_e = 2 * self.signs.astype(np.int64) + np.einsum("ij,ij->i", xr, zr)
            # (-1)^(z_i . x_j) for every ordered pair i < j of selected rows
            pair = np.triu(zr @ xr.T, 1)
            c["phase"] = (m, row_e, pair)
        return c["phase"]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"CliffordTableau(n={self.n_qubits}, {self.to_hex()})"


def conjugate_bits(t: CliffordTableau, x: np.ndarray, z: np.ndarray, negative: np.ndarray):
    """Vectorized conjugation of a batch of Hermitian Paulis.

    ``x``, ``z`` have shape ``(B, n)`` and ``negative`` shape ``(B,)`` (1 for
    a minus sign).  Returns ``(x', z', negative')``.
    """
    m, row_e, pair = t._phase_data()
    n = t.n_qubits
    x = np.atleast_2d(x).astype(np.int64)
    z = np.atleast_2d(z).astype(np.int64)
    if x.shape[1] != n:
        raise ValueError(f"size mismatch: tableau on {n} qubits, Pauli on {x.shape[1]}")
    v = np.concatenate([x, z], axis=1)
    out = (v @ m) % 2
    # i^(x.z) X^x Z^z = i^(x.z) prod_j img(X_j)^x_j prod_j img(Z_j)^z_j
    e = 2 * np.asarray(negative, np.int64) + np.einsum("ij,ij->i", x, z)
    e = e + v @ row_e + 2 * np.einsum("bi,bi->b", v @ pair, v)
    xo, zo = out[:, :n], out[:, n:]
    e = (e - np.einsum("ij,ij->i", xo, zo)) % 4
    if np.any(e % 2):
        raise AssertionError("Clifford conjugation produced a non-Hermitian image")
    return xo.astype(np.uint8), zo.astype(np.uint8), (e // 2).astype(np.uint8)


def conjugate_pauli(t: CliffordTableau, p: PauliString) -> PauliString:
    """Signed image ``C p C^dagger``."""
    if t.n_qubits != p.n_qubits:
        raise ValueError(f"size mismatch: tableau on {t.n_qubits} qubits, Pauli on {p.n_qubits}")
    xo, zo, neg = conjugate_bits(t, p.x[None, :], p.z[None, :], np.array([p.sign < 0]))
    return PauliString(xo[0], zo[0], -1 if neg[0] else 1)


def compose(outer: CliffordTableau, inner: CliffordTableau) -> CliffordTableau:
    """Tableau of the unitary ``outer * inner`` (``inner`` acts first)."""
    if outer.n_qubits != inner.n_qubits:
        raise ValueError(f"size mismatch: {outer.n_qubits} vs {inner.n_qubits} qubits")
    n = inner.n_qubits
    m = inner.symplectic
    xo, zo, neg = conjugate_bits(outer, m[:, :n], m[:, n:], inner.signs)
    return CliffordTableau(np.concatenate([xo, zo], axis=1), neg, check=False)


def invert(t: CliffordTableau) -> CliffordTableau:
    n = t.n_qubits
    lam = symplectic_form(n)
    m_inv = (lam @ t.symplectic.astype(np.int64).T @ lam) % 2
    # choose signs so that t maps each preimage back onto +generator
    _, _, neg = conjugate_bits(t, m_inv[:, :n], m_inv[:, n:], np.zeros(2 * n, np.int64))
    return CliffordTableau(m_inv, neg)


def embed(t2: CliffordTableau, bond: int, n: int) -> CliffordTableau:
    """Lift a two-qubit tableau onto qubits ``(bond, bond + 1)`` of an n-qubit chain."""
    if t2.n_qubits != 2:
        raise ValueError("embed expects a two-qubit tableau")
    if not 0 <= bond <= n - 2:
        raise IndexError(f"bond {bond} out of range for {n} qubits")
    m = np.eye(2 * n, dtype=np.uint8)
    s = np.zeros(2 * n, np.uint8)
    # local index a -> global row/column offset
    glob = [bond, bond + 1, n + bond, n + bond + 1]
    for a in range(4):
        for b in range(4):
            m[glob[a], glob[b]] = t2.symplectic[a, b]
        s[glob[a]] = t2.signs[a]
    return CliffordTableau(m, s, check=False)


# ---------------------------------------------------------------------------
# two-qubit gate set

_SQ2 = 1 / np.sqrt(2)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
_S = np.diag([1, 1j])
_I2 = np.eye(2, dtype=complex)

#: Generator matrices with qubit 0 as the most significant tensor factor.
GATE_MATRICES = {
    "H0": np.kron(_H, _I2),
    "H1": np.kron(_I2, _H),
    "S0": np.kron(_S, _I2),
    "S1": np.kron(_I2, _S),
    "CX01": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CX10": np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex),
}

_PAULI_1Q = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def _code_bits(code: int) -> tuple[int, int]:
    return [(0, 0), (1, 0), (1, 1), (0, 1)][code]


def _two_qubit_paulis():
    """The 16 Hermitian two-qubit Paulis as (bits 4-vector, matrix), id = 4*mu0 + mu1."""
    out = []
    for mu0 in range(4):
        for mu1 in range(4):
            (x0, z0), (x1, z1) = _code_bits(mu0), _code_bits(mu1)
            out.append(((x0, x1, z0, z1), np.kron(_PAULI_1Q[mu0], _PAULI_1Q[mu1])))
    return out


_BITS_TO_ID = {bits: i for i, (bits, _) in enumerate(_two_qubit_paulis())}


def _dense_conjugation_table(u: np.ndarray):
    """For each two-qubit Pauli id: (image id, sign flip) under ``u P u^dagger``."""
    paulis = _two_qubit_paulis()
    mats = np.array([m for _, m in paulis])
    table = []
    for _, p in paulis:
        img = u @ p @ u.conj().T
        overlaps = np.einsum("kij,ji->k", mats, img).real / 4
        k = int(np.argmax(np.abs(overlaps)))
        if abs(abs(overlaps[k]) - 1) > 1e-9:
            raise AssertionError("matrix is not Clifford")
        table.append((k, 0 if overlaps[k] > 0 else 1))
    return table


_GEN_ROWS = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]  # X0 X1 Z0 Z1


def _rows_key(t: CliffordTableau) -> tuple:
    return tuple(
        (_BITS_TO_ID[tuple(int(b) for b in row)], int(s))
        for row, s in zip(t.symplectic, t.signs)
    )


def _key_to_tableau(key: tuple) -> CliffordTableau:
    bits = [_two_qubit_paulis()[pid][0] for pid, _ in key]
    return CliffordTableau(np.array(bits, np.uint8), [s for _, s in key])


@lru_cache(maxsize=None)
def _clifford2_group():
    """BFS over H/S/CNOT words: key -> (unitary, word) for all 11520 signed tableaux."""
    tables = {g: _dense_conjugation_table(u) for g, u in GATE_MATRICES.items()}
    start = tuple((_BITS_TO_ID[r], 0) for r in _GEN_ROWS)
    found = {start: (np.eye(4, dtype=complex), ())}
    queue = deque([start])
    while queue:
        key = queue.popleft()
        u, word = found[key]
        for g, table in tables.items():
            new = tuple((table[pid][0], s ^ table[pid][1]) for pid, s in key)
            if new not in found:
                found[new] = (GATE_MATRICES[g] @ u, word + (g,))
                queue.append(new)
    if len(found) != 11520:
        raise AssertionError(f"two-qubit Clifford group has {len(found)} elements, expected 11520")
    return found


def _normalize_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    k = int(np.flatnonzero(np.abs(flat) > 1e-12)[0])
    return u * (abs(flat[k]) / flat[k])


def synthesize_unitary(t: CliffordTableau) -> np.ndarray:
    """4x4 unitary realizing ``t``; global phase fixed so the first nonzero entry is positive."""
    if t.n_qubits != 2:
        raise ValueError("synthesis is implemented for two-qubit tableaux")
    try:
        u, _ = _clifford2_group()[_rows_key(t)]
    except KeyError:
        raise AssertionError(f"no H/S/CNOT word for tableau {t.to_hex()}") from None
    return _normalize_phase(u)


def synthesize_circuit(t: CliffordTableau) -> tuple[str, ...]:
    """Shortest H/S/CNOT word for ``t``; gates listed in application order."""
    if t.n_qubits != 2:
        raise ValueError("synthesis is implemented for two-qubit tableaux")
    return _clifford2_group()[_rows_key(t)][1]


def gate_tableau(name: str) -> CliffordTableau:
    """Tableau of one of the named generators in :data:`GATE_MATRICES`."""
    table = _dense_conjugation_table(GATE_MATRICES[name])
    key = tuple(table[_BITS_TO_ID[r]] for r in _GEN_ROWS)
    return _key_to_tableau(key)


def _commute4(a, b) -> int:
    return (a[0] * b[2] + a[1] * b[3] + a[2] * b[0] + a[3] * b[1]) % 2


@lru_cache(maxsize=None)
def _positive_symplectic() -> tuple[CliffordTableau, ...]:
    vecs = [tuple((k >> s) & 1 for s in (3, 2, 1, 0)) for k in range(1, 16)]
    out = []
    seen = set()
    for a in vecs:  # image of X0
        for b in vecs:  # image of Z0
            if not _commute4(a, b):
                continue
            for c in vecs:  # image of X1
                if _commute4(a, c) or _commute4(b, c):
                    continue
                for d in vecs:  # image of Z1
                    if not _commute4(c, d) or _commute4(a, d) or _commute4(b, d):
                        continue
                    t = CliffordTableau(np.array([a, c, b, d], np.uint8))
                    if t.key() in seen:
                        raise AssertionError("duplicate symplectic matrix in enumeration")
                    seen.add(t.key())
                    out.append(t)
    return tuple(out)


def enumerate_two_qubit_positive() -> list[CliffordTableau]:
    """All 720 two-qubit symplectic matrices with every sign bit zero, fixed order."""
    return list(_positive_symplectic())


@dataclass(frozen=True)
class TwoQubitGate:
    tableau: CliffordTableau
    unitary: np.ndarray
    candidate_id: int


@lru_cache(maxsize=None)
def _candidates() -> tuple[TwoQubitGate, ...]:
    gates = []
    for i, t in enumerate(_positive_symplectic()):
        u = synthesize_unitary(t)
        u.flags.writeable = False
        gates.append(TwoQubitGate(t, u, i))
    return tuple(gates)


def two_qubit_candidates() -> tuple[TwoQubitGate, ...]:
    """The 720 positive-sign candidates with synthesized unitaries (computed once)."""
    return _candidates()


@lru_cache(maxsize=None)
def candidate_unitaries() -> np.ndarray:
    """Stacked ``(720, 4, 4)`` candidate unitaries, read-only."""
    a = np.array([g.unitary for g in _candidates()])
    a.flags.writeable = False
    return a


def sign_pauli(pauli_id: int) -> PauliString:
    """Two-qubit Pauli number ``pauli_id = 4*mu0 + mu1`` with mu in I, X, Y, Z order."""
    if not 0 <= pauli_id < 16:
        raise ValueError(f"sign Pauli id must be in [0, 16), got {pauli_id}")
    (x0, z0), (x1, z1) = _code_bits(pauli_id // 4), _code_bits(pauli_id % 4)
    return PauliString([x0, x1], [z0, z1])


def random_sign_pauli(rng: np.random.Generator) -> tuple[int, PauliString]:
    """Uniform draw of one of the 16 two-qubit Paulis.

    Left-multiplying a candidate gate by the returned Pauli realizes one of
    the 2**4 sign configurations of its tableau.
    """
    k = int(rng.integers(16))
    return k, sign_pauli(k)
