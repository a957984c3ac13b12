"""Independent dense reference helpers shared by the test modules."""
import numpy as np
from functools import reduce

from clifford_tdvp.mps import MPS
from clifford_tdvp.oracle import pauli_matrix
from clifford_tdvp.tableau import (
    CliffordTableau,
    compose,
    embed,
    random_sign_pauli,
    sign_pauli,
    two_qubit_candidates,
)


# plain numpy Pauli matrices, kept apart from the package's own table
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
LETTER = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense_label(label):
    """Kronecker product for a label like ``'-XIZ'`` (site 0 leftmost)."""
    sign = -1 if label.startswith("-") else 1
    return sign * reduce(np.kron, [LETTER[c] for c in label.lstrip("+-")])


def dense_sum(terms, n):
    out = np.zeros((2**n, 2**n), complex)
    for c, label in terms:
        out += c * dense_label(label)
    return out


def random_mps(n, chi, rng, center=0):
    """Random normalized MPS with bonds ``min(2**j, 2**(n-j), chi)``."""
    dims = [1] + [min(2 ** min(j, n - j), chi) for j in range(1, n)] + [1]
    tensors = [
        rng.normal(size=(dims[i], 2, dims[i + 1])) + 1j * rng.normal(size=(dims[i], 2, dims[i + 1]))
        for i in range(n)
    ]
    psi = MPS(tensors, center=n - 1)
    psi.canonicalize(center)
    return psi


def random_state_vector(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_tableau(n, rng, depth=3):
    """Random brickwork of candidate gates and sign Paulis."""
    cands = two_qubit_candidates()
    t = CliffordTableau.identity(n)
    for layer in range(depth):
        for bond in range(layer % 2, n - 1, 2):
            g = cands[rng.integers(len(cands))].tableau
            _, p = random_sign_pauli(rng)
            g = compose(CliffordTableau.from_pauli(p), g)
            t = compose(embed(g, bond, n), t)
    return t


def random_circuit(n, rng, depth=3):
    """Random Clifford brickwork as ``(tableau, dense unitary)``."""
    cands = two_qubit_candidates()
    t = CliffordTableau.identity(n)
    u = np.eye(2**n, dtype=complex)
    for layer in range(depth):
        for bond in range(layer % 2, n - 1, 2):
            g = cands[rng.integers(len(cands))]
            u2 = g.unitary
            full = np.kron(np.kron(np.eye(2**bond), u2), np.eye(2 ** (n - bond - 2)))
            t = compose(embed(g.tableau, bond, n), t)
            u = full @ u
    return t, u


def gate_unitary(rec, n):
    """Dense n-qubit unitary of one committed cooling gate."""
    u2 = pauli_matrix(sign_pauli(rec.sign_pauli_id)) @ two_qubit_candidates()[rec.candidate_id].unitary
    return np.kron(np.kron(np.eye(2**rec.bond), u2), np.eye(2 ** (n - rec.bond - 2)))


def report_unitary(report, n):
    """Product of all committed gates of a cooling report (later gates on the left)."""
    u = np.eye(2**n, dtype=complex)
    for rec in report.records:
        if not rec.skipped:
            u = gate_unitary(rec, n) @ u
    return u
