"""Finite matrix product states for qubit chains.

Site tensors have shape ``(left bond, 2, right bond)``; physical index 0 is
``|0>`` (sigma^3 = +1).  Bond ``j`` joins sites ``j`` and ``j + 1``.  The
state is kept in mixed canonical form around ``center``.

Dense vectors produced by :meth:`MPS.to_dense` use site 0 as the most
significant tensor factor, matching ``np.kron(op_0, op_1, ...)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString

__all__ = [
    "MPS",
    "TruncationReport",
    "product_state",
    "entropy_from_schmidt",
    "entropy_after_gate",
    "entropies_after_gates",
    "PAULI_MATRICES",
]

PAULI_MATRICES = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

#: Schmidt probabilities below this contribute nothing to the entropy.
ENTROPY_EPS = 1e-16


@dataclass(frozen=True)
class TruncationReport:
    bond: int
    discarded_weight: float
    new_dim: int


def entropy_from_schmidt(s: np.ndarray) -> float:
    """Von Neumann entropy (natural log) of Schmidt values ``s``."""
    p = np.asarray(s, dtype=float) ** 2
    p = p[p > ENTROPY_EPS]
    return float(-np.sum(p * np.log(p))) + 0.0  # no -0.0


def _entropy_rows(s: np.ndarray) -> np.ndarray:
    p = s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > ENTROPY_EPS, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def _gate_on_theta(theta: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.einsum("ts,asc->atc", u, theta)


def entropy_after_gate(theta: np.ndarray, u: np.ndarray) -> float:
    """Entropy across the middle cut of ``u`` applied to a two-site tensor ``(l, 4, r)``."""
    l, _, r = theta.shape
    m = _gate_on_theta(theta, u).reshape(2 * l, 2 * r)
    return entropy_from_schmidt(np.linalg.svd(m, compute_uv=False))


def entropies_after_gates(theta: np.ndarray, us: np.ndarray, chunk: int = 90) -> np.ndarray:
    """Batched :func:`entropy_after_gate` over a stack of gates ``(K, 4, 4)``."""
    l, _, r = theta.shape
    out = np.empty(len(us))
    for start in range(0, len(us), chunk):
        block = us[start : start + chunk]
        m = np.einsum("kts,asc->katc", block, theta).reshape(len(block), 2 * l, 2 * r)
        out[start : start + chunk] = _entropy_rows(np.linalg.svd(m, compute_uv=False))
    return out


class MPS:
    """Matrix product state with an orthogonality center.

    Parameters
    ----------
    tensors : list of ndarray
        Site tensors ``(left, 2, right)``; boundary bonds must be 1.
    center : int
        Site carrying the norm.  The caller guarantees the isometry
        conditions; use :meth:`canonicalize` otherwise.
    chi_max : int
        Bond cap applied whenever a two-site gate is split.
    svd_cutoff : float
        Largest discarded weight tolerated beyond the bond's current size.
    """

    def __init__(self, tensors, center: int = 0, chi_max: int = 2**30, svd_cutoff: float = 0.0):
        tensors = [np.asarray(a, dtype=complex) for a in tensors]
        if len(tensors) < 1:
            raise ValueError("an MPS needs at least one site")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for i, (a, b) in enumerate(zip(tensors[:-1], tensors[1:])):
            if a.shape[2] != b.shape[0]:
                raise ValueError(f"bond {i} dimension mismatch: {a.shape[2]} vs {b.shape[0]}")
        if any(a.ndim != 3 or a.shape[1] != 2 for a in tensors):
            raise ValueError("site tensors must have shape (left, 2, right)")
        if not 0 <= center < len(tensors):
            raise IndexError(f"center {center} out of range")
        if chi_max < 1 or svd_cutoff < 0:
            raise ValueError("chi_max must be positive and svd_cutoff nonnegative")
        self.tensors = tensors
        self.center = center
        self.chi_max = int(chi_max)
        self.svd_cutoff = float(svd_cutoff)

    # ------------------------------------------------------------------ basics

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [a.shape[2] for a in self.tensors[:-1]]

    def copy(self) -> "MPS":
        return MPS([a.copy() for a in self.tensors], self.center, self.chi_max, self.svd_cutoff)

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensors[self.center]))

    def to_dense(self) -> np.ndarray:
        psi = self.tensors[0].reshape(2, -1)
        for a in self.tensors[1:]:
            psi = (psi @ a.reshape(a.shape[0], -1)).reshape(-1, a.shape[2])
        return psi.reshape(-1)

    @classmethod
    def from_dense(cls, psi: np.ndarray, n: int, chi_max: int = 2**30, svd_cutoff: float = 0.0) -> "MPS":
        """Exact (untruncated) MPS of a dense vector; center at site 0."""
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        if psi.shape[0] != 2**n:
            raise ValueError(f"vector of length {psi.shape[0]} is not a {n}-qubit state")
        tensors = []
        rest = psi.reshape(1, -1)
        for _ in range(n - 1):
            l = rest.shape[0]
            m = rest.reshape(l * 2, -1)
            q, r = np.linalg.qr(m)
            tensors.append(q.reshape(l, 2, q.shape[1]))
            rest = r
        tensors.append(rest.reshape(rest.shape[0], 2, 1))
        state = cls(tensors, n - 1, chi_max, svd_cutoff)
        state.move_center(0)
        return state

    def dump_summary(self) -> dict:
        """Tensor shapes and per-bond Schmidt spectra, JSON-ready."""
        work = self.copy()
        work.move_center(0)
        spectra = []
        for j in range(self.n_sites - 1):
            work.move_center(j)
            spectra.append(work.schmidt_values(j).tolist())
        return {
            "n_sites": self.n_sites,
            "center": self.center,
            "chi_max": self.chi_max,
            "shapes": [list(a.shape) for a in self.tensors],
            "bond_dims": self.bond_dims,
            "schmidt_values": spectra,
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.dump_summary(), fh)

    # ---------------------------------------------------------- canonical form

    def _shift_right(self, i: int) -> None:
        a = self.tensors[i]
        l, _, r = a.shape
        q, rr = np.linalg.qr(a.reshape(l * 2, r))
        self.tensors[i] = q.reshape(l, 2, q.shape[1])
        self.tensors[i + 1] = np.tensordot(rr, self.tensors[i + 1], axes=(1, 0))

    def _shift_left(self, i: int) -> None:
        a = self.tensors[i]
        l, _, r = a.shape
        q, rr = np.linalg.qr(a.reshape(l, 2 * r).T)
        self.tensors[i] = q.T.reshape(q.shape[1], 2, r)
        self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], rr.T, axes=(2, 0))

    def move_center(self, target: int) -> "MPS":
        if not 0 <= target < self.n_sites:
            raise IndexError(f"target site {target} out of range for {self.n_sites} sites")
        while self.center < target:
            self._shift_right(self.center)
            self.center += 1
        while self.center > target:
            self._shift_left(self.center)
            self.center -= 1
        return self

    def canonicalize(self, center: int = 0) -> "MPS":
        """Restore the isometry conditions from scratch and normalize."""
        self.center = 0
        for i in range(self.n_sites - 1):
            self._shift_right(i)
        self.center = self.n_sites - 1
        self.move_center(center)
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize a zero state")
        self.tensors[self.center] /= nrm
        return self

    def pad_bonds(self, chi: int | None = None) -> "MPS":
        """Enlarge every bond to ``min(2**(j+1), 2**(N-j-1), chi)`` without changing the state.

        The single-site integrator cannot grow bonds, so product states are
        padded with zero-weight directions before evolution.  The extra
        directions are orthonormal completions produced by QR.
        """
        chi = self.chi_max if chi is None else chi
        n = self.n_sites
        for j in range(n - 1):
            target = min(2 ** min(j + 1, n - j - 1, 62), chi)
            a, b = self.tensors[j], self.tensors[j + 1]
            d = a.shape[2]
            if d >= target:
                continue
            pa = np.zeros((a.shape[0], 2, target), complex)
            pa[:, :, :d] = a
            pb = np.zeros((target, 2, b.shape[2]), complex)
            pb[:d] = b
            self.tensors[j], self.tensors[j + 1] = pa, pb
        center = self.center
        self.center = 0
        for i in range(n - 1):
            self._shift_right(i)
        self.center = n - 1
        self.move_center(center)
        return self

    def check_isometries(self, tol: float = 1e-10) -> bool:
        for i, a in enumerate(self.tensors):
            l, _, r = a.shape
            if i < self.center:
                m = a.reshape(l * 2, r)
                ok = np.allclose(m.conj().T @ m, np.eye(r), atol=tol)
            elif i > self.center:
                m = a.reshape(l, 2 * r)
                ok = np.allclose(m @ m.conj().T, np.eye(l), atol=tol)
            else:
                ok = True
            if not ok:
                return False
        return True

    # ------------------------------------------------------------ two-site ops

    def _require_adjacent(self, bond: int) -> None:
        if not 0 <= bond < self.n_sites - 1:
            raise IndexError(f"bond {bond} out of range for {self.n_sites} sites")
        if self.center not in (bond, bond + 1):
            raise ValueError(f"center {self.center} is not adjacent to bond {bond}")

    def two_site_theta(self, bond: int) -> np.ndarray:
        """Two-site tensor ``(l, 4, r)`` of sites ``bond, bond + 1``."""
        self._require_adjacent(bond)
        a, b = self.tensors[bond], self.tensors[bond + 1]
        theta = np.tensordot(a, b, axes=(2, 0))
        return theta.reshape(a.shape[0], 4, b.shape[2])

    def apply_two_site_gate(self, u: np.ndarray, bond: int, move_right: bool = True) -> TruncationReport:
        """Apply ``u`` to sites ``bond, bond + 1`` and split with an SVD.

        The bond keeps at least its current dimension (zero-weight directions
        stay available to the single-site integrator), grows up to
        ``chi_max`` and only drops weight beyond that.  Retained Schmidt
        values are renormalized.  The center ends at ``bond + 1`` when
        ``move_right`` else at ``bond``.
        """
        self._require_adjacent(bond)
        u = np.asarray(u, dtype=complex)
        if u.shape != (4, 4) or not np.allclose(u.conj().T @ u, np.eye(4), atol=1e-10):
            raise ValueError("two-site gate must be a 4x4 unitary")
        theta = self.two_site_theta(bond)
        l, _, r = theta.shape
        old = self.tensors[bond].shape[2]
        m = _gate_on_theta(theta, u).reshape(2 * l, 2 * r)
        uu, s, vh = np.linalg.svd(m, full_matrices=False)
        w = s**2
        tail = np.cumsum(w[::-1])[::-1]  # tail[i] = sum_{k >= i} w_k
        needed = int(np.count_nonzero(tail > self.svd_cutoff)) if self.svd_cutoff > 0 else int(np.count_nonzero(s))
        keep = min(max(needed, old, 1), self.chi_max, len(s))
        discarded = float(w[keep:].sum())
        s = s[:keep]
        nrm = np.linalg.norm(s)
        if nrm == 0:
            raise ValueError("gate application produced a zero state")
        s = s / nrm
        a = uu[:, :keep].reshape(l, 2, keep)
        b = vh[:keep].reshape(keep, 2, r)
        if move_right:
            self.tensors[bond] = a
            self.tensors[bond + 1] = s[:, None, None] * b
            self.center = bond + 1
        else:
            self.tensors[bond] = a * s[None, None, :]
            self.tensors[bond + 1] = b
            self.center = bond
        return TruncationReport(bond, discarded, keep)

    # ------------------------------------------------------------ measurement

    def schmidt_values(self, bond: int) -> np.ndarray:
        self._require_adjacent(bond)
        a = self.tensors[self.center]
        l, _, r = a.shape
        m = a.reshape(l * 2, r) if self.center == bond else a.reshape(l, 2 * r)
        return np.linalg.svd(m, compute_uv=False)

    def bond_entropy(self, bond: int) -> float:
        s = self.schmidt_values(bond)
        if abs(np.linalg.norm(s) - 1) > 1e-8:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(s):.3e})")
        return entropy_from_schmidt(s)

    def entropy_profile(self) -> np.ndarray:
        """Entropy at every bond, measured on a copy (gauge of ``self`` untouched)."""
        work = self.copy()
        out = np.empty(self.n_sites - 1)
        work.move_center(0)
        for j in range(self.n_sites - 1):
            work.move_center(j)
            out[j] = work.bond_entropy(j)
        return out

    def midpoint_entropy(self) -> float:
        bond = self.n_sites // 2 - 1
        work = self.copy()
        work.move_center(bond if self.center <= bond else bond + 1)
        return work.bond_entropy(bond)

    def expect_pauli(self, p: PauliString) -> float:
        """``<psi|p|psi>`` including the sign of ``p``.

        Only the sites between the support of ``p`` and the center are
        contracted; the isometries reduce the rest to identities.
        """
        if p.n_qubits != self.n_sites:
            raise ValueError(f"size mismatch: {p.n_qubits}-qubit Pauli on {self.n_sites} sites")
        support = p.support
        c = self.center
        if support.size == 0:
            return p.sign * self.norm() ** 2
        lo, hi = min(int(support[0]), c), max(int(support[-1]), c)
        codes = p.codes
        env = np.eye(self.tensors[lo].shape[0], dtype=complex)
        for i in range(lo, hi + 1):
            a = self.tensors[i]
            sa = np.einsum("ts,asc->atc", PAULI_MATRICES[codes[i]], a) if codes[i] else a
            # env'[c', c] = sum conj(a[a', t, c']) env[a', a] sa[a, t, c]
            tmp = np.tensordot(env, sa, axes=(1, 0))
            env = np.tensordot(a.conj(), tmp, axes=([0, 1], [0, 1]))
        return p.sign * float(np.trace(env).real)


def product_state(bits, chi_max: int = 2**30, svd_cutoff: float = 0.0) -> MPS:
    """Computational basis state ``|bits_0 bits_1 ...>`` with unit bonds."""
    bits = [int(b) for b in bits]
    if len(bits) == 0:
        raise ValueError("empty bit list")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    tensors = []
    for b in bits:
        a = np.zeros((1, 2, 1), complex)
        a[0, b, 0] = 1.0
        tensors.append(a)
    return MPS(tensors, 0, chi_max, svd_cutoff)
