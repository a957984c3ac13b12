"""Per-term environments and effective operators for single-site TDVP.

The Hamiltonian is a sum of Pauli strings, so as an MPO it is diagonal in
its auxiliary index: each term ``J_k P_k`` contributes its own left block
``L_k`` and right block ``R_k`` and a single 2x2 Pauli on the active site.
Blocks of a term whose support lies entirely on the other side of a cut
are identities (the MPS tensors there are isometries) and are never stored.

Block convention: ``L[a', a]`` with ``a'`` the bra index, so that

    <a' s' c'| H_eff |a s c> = sum_k J_k L_k[a', a] sigma_k[s', s] R_k[c', c]
"""
from __future__ import annotations

import numpy as np

from .mps import MPS, PAULI_MATRICES
from .pauli import PauliSum

__all__ = ["Environments", "EffectiveOperator", "build_environments", "StaleEnvironmentError"]


class StaleEnvironmentError(RuntimeError):
    """Raised when an effective operator needs a block that is out of date."""


class EffectiveOperator:
    """Matrix-free Hermitian map on a site tensor or bond matrix.

    ``apply`` works on flattened vectors; ``shape`` is the tensor shape the
    vector reshapes to.
    """

    def __init__(self, kind: str, shape: tuple[int, ...], apply):
        self.kind = kind
        self.shape = tuple(shape)
        self.dimension = int(np.prod(shape))
        self._apply = apply

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self._apply(np.asarray(v).reshape(self.shape)).reshape(-1)

    __call__ = apply

    def to_dense(self) -> np.ndarray:
        eye = np.eye(self.dimension, dtype=complex)
        return np.stack([self.apply(col) for col in eye], axis=1)


def _apply_paulis(codes: np.ndarray, t: np.ndarray, axis: int) -> np.ndarray:
    """Apply per-term Paulis ``codes[k]`` to axis ``axis`` of a batch ``t[k, ...]``."""
    mats = PAULI_MATRICES[codes]
    t = np.moveaxis(t, axis, 1)
    out = np.einsum("kts,ks...->kt...", mats, t)
    return np.moveaxis(out, 1, axis)


class Environments:
    """Left/right per-term blocks of a Pauli-sum Hamiltonian around an MPS."""

    def __init__(self, state: MPS, hamiltonian: PauliSum):
        n = state.n_sites
        if hamiltonian.n_qubits != n:
            raise ValueError(
                f"size mismatch: Hamiltonian on {hamiltonian.n_qubits} qubits, state on {n} sites"
            )
        self.hamiltonian = hamiltonian
        self.n_sites = n
        self.coeffs = np.asarray(hamiltonian.coeffs, dtype=float)
        x = hamiltonian.x_bits().astype(np.int64)
        z = hamiltonian.z_bits().astype(np.int64)
        self.codes = x * (1 + z) + (1 - x) * 3 * z  # (K, N) into I, X, Y, Z
        support = (x | z).astype(bool)
        k = len(self.coeffs)
        self.first = np.full(k, n, dtype=np.int64)
        self.last = np.full(k, -1, dtype=np.int64)
        for i in range(k):
            nz = np.flatnonzero(support[i])
            if nz.size:
                self.first[i], self.last[i] = nz[0], nz[-1]
        # left[n]: (term indices with first < n, blocks) on the bond left of site n
        self.left: list = [None] * n
        self.right: list = [None] * n
        self.left_valid = np.zeros(n, dtype=bool)
        self.right_valid = np.zeros(n, dtype=bool)
        empty = np.zeros(0, dtype=np.int64)
        self.left[0] = (empty, np.zeros((0, 1, 1), complex))
        self.right[n - 1] = (empty, np.zeros((0, 1, 1), complex))
        self.left_valid[0] = self.right_valid[n - 1] = True
        c = state.center
        for i in range(c):
            self.update_left(state, i)
        for i in range(n - 1, c, -1):
            self.update_right(state, i)

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    def block_count(self) -> int:
        """Number of stored (non-identity) blocks."""
        return sum(len(b[0]) for b in self.left if b is not None) + sum(
            len(b[0]) for b in self.right if b is not None
        )

    # ---------------------------------------------------------------- updates

    def update_left(self, state: MPS, site: int) -> None:
        """Left block of bond ``site`` -> ``site + 1`` through the left isometry at ``site``."""
        if not self.left_valid[site]:
            raise StaleEnvironmentError(f"left block at site {site} is stale")
        a = state.tensors[site]
        l, _, r = a.shape
        idx_old, blocks_old = self.left[site]
        idx = np.flatnonzero(self.first <= site)
        blocks = np.empty((len(idx), l, l), complex)
        pos = np.searchsorted(idx, idx_old)
        blocks[pos] = blocks_old
        fresh = np.ones(len(idx), bool)
        fresh[pos] = False
        blocks[fresh] = np.eye(l)
        # tmp[k, a', s, c] = sum_a L[k, a', a] A[a, s, c]
        tmp = (blocks @ a.reshape(l, 2 * r)).reshape(len(idx), l, 2, r)
        tmp = _apply_paulis(self.codes[idx, site], tmp, 2)
        new = a.reshape(l * 2, r).conj().T @ tmp.reshape(len(idx), l * 2, r)
        self.left[site + 1] = (idx, new)
        self.left_valid[site + 1] = True
        self.right_valid[:site] = False

    def update_right(self, state: MPS, site: int) -> None:
        """Right block of bond ``site - 1`` -> ``site`` through the right isometry at ``site``."""
        if not self.right_valid[site]:
            raise StaleEnvironmentError(f"right block at site {site} is stale")
        b = state.tensors[site]
        l, _, r = b.shape
        idx_old, blocks_old = self.right[site]
        idx = np.flatnonzero(self.last >= site)
        blocks = np.empty((len(idx), r, r), complex)
        pos = np.searchsorted(idx, idx_old)
        blocks[pos] = blocks_old
        fresh = np.ones(len(idx), bool)
        fresh[pos] = False
        blocks[fresh] = np.eye(r)
        # tmp[k, a, s, c'] = sum_c B[a, s, c] R[k, c', c]
        tmp = (b.reshape(l * 2, r) @ blocks.transpose(0, 2, 1)).reshape(len(idx), l, 2, r)
        tmp = _apply_paulis(self.codes[idx, site], tmp, 2)
        # new[k, a', a] = sum conj(B[a', s, c']) tmp[k, a, s, c']
        new = b.reshape(l, 2 * r).conj() @ tmp.reshape(len(idx), l, 2 * r).transpose(0, 2, 1)
        self.right[site - 1] = (idx, new)
        self.right_valid[site - 1] = True
        self.left_valid[site + 1 :] = False

    advance_left = update_left
    advance_right = update_right

    def _check(self, left_site: int, right_site: int) -> None:
        if not self.left_valid[left_site]:
            raise StaleEnvironmentError(f"left block at site {left_site} is stale")
        if not self.right_valid[right_site]:
            raise StaleEnvironmentError(f"right block at site {right_site} is stale")

    # ---------------------------------------------------- effective operators

    def _grouped(self, idx_side, blocks, mask, codes, dim):
        """Sum ``J_k * block_k`` per local Pauli code over the terms in ``mask``."""
        out = np.zeros((4, dim, dim), complex)
        lookup = {int(t): i for i, t in enumerate(idx_side)}
        for k in np.flatnonzero(mask):
            i = lookup.get(int(k))
            blk = blocks[i] if i is not None else np.eye(dim)
            out[codes[k]] += self.coeffs[k] * blk
        return out

    def effective_site(self, site: int) -> EffectiveOperator:
        """``H_eff`` on the site tensor at ``site`` (shape ``(l, 2, r)``)."""
        self._check(site, site)
        lidx, lblk = self.left[site]
        ridx, rblk = self.right[site]
        l, r = lblk.shape[1], rblk.shape[1]
        has_left = self.first < site
        has_right = self.last > site
        codes = self.codes[:, site]
        # terms with a trivial right block, grouped by their Pauli on this site
        left_only = self._grouped(lidx, lblk, ~has_right, codes, l)
        right_only = self._grouped(ridx, rblk, has_right & ~has_left, codes, r)
        both = np.flatnonzero(has_left & has_right)
        lpos = np.searchsorted(lidx, both)
        rpos = np.searchsorted(ridx, both)
        bl = lblk[lpos]
        br_t = rblk[rpos].transpose(0, 2, 1)
        bj = self.coeffs[both]
        bc = codes[both]
        used_l = [mu for mu in range(4) if np.any(left_only[mu])]
        used_r = [mu for mu in range(4) if np.any(right_only[mu])]

        def apply(v):
            out = np.zeros_like(v)
            for mu in used_l:
                t = np.tensordot(left_only[mu], v, axes=(1, 0))
                out += np.einsum("ts,asc->atc", PAULI_MATRICES[mu], t) if mu else t
            for mu in used_r:
                t = np.tensordot(v, right_only[mu], axes=(2, 1))
                out += np.einsum("ts,asc->atc", PAULI_MATRICES[mu], t) if mu else t
            if len(both):
                t = (bl @ v.reshape(l, 2 * r)).reshape(len(both), l, 2, r)
                t = _apply_paulis(bc, t, 2).reshape(len(both), l * 2, r) @ br_t
                out += np.tensordot(bj, t, axes=(0, 0)).reshape(l, 2, r)
            return out

        return EffectiveOperator("site", (l, 2, r), apply)

    def effective_bond(self, bond: int) -> EffectiveOperator:
        """``K_eff`` on the bond matrix between sites ``bond`` and ``bond + 1``."""
        self._check(bond + 1, bond)
        lidx, lblk = self.left[bond + 1]
        ridx, rblk = self.right[bond]
        l, r = lblk.shape[1], rblk.shape[1]
        has_left = self.first <= bond
        has_right = self.last > bond
        lmat = np.zeros((l, l), complex)
        for i, k in enumerate(lidx):
            if not has_right[k]:
                lmat += self.coeffs[k] * lblk[i]
        rmat = np.zeros((r, r), complex)
        for i, k in enumerate(ridx):
            if not has_left[k]:
                rmat += self.coeffs[k] * rblk[i]
        scalar = float(self.coeffs[~has_left & ~has_right].sum())
        both = np.flatnonzero(has_left & has_right)
        bl = lblk[np.searchsorted(lidx, both)]
        br_t = rblk[np.searchsorted(ridx, both)].transpose(0, 2, 1)
        bj = self.coeffs[both]

        def apply(c):
            out = lmat @ c + c @ rmat.T + scalar * c
            if len(both):
                out = out + np.tensordot(bj, bl @ c @ br_t, axes=(0, 0))
            return out

        return EffectiveOperator("bond", (l, r), apply)

    def energy(self, state: MPS) -> float:
        """``<psi|H|psi>`` evaluated at the center."""
        c = state.center
        a = state.tensors[c]
        return float(np.vdot(a, self.effective_site(c).apply(a)).real)


def build_environments(state: MPS, hamiltonian: PauliSum) -> Environments:
    return Environments(state, hamiltonian)
