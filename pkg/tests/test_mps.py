import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from clifford_tdvp.mps import (
    MPS,
    entropies_after_gates,
    entropy_after_gate,
    entropy_from_schmidt,
    product_state,
)
from clifford_tdvp.oracle import pauli_matrix
from clifford_tdvp.pauli import PauliString, pauli_from_labels
from clifford_tdvp.tableau import candidate_unitaries, conjugate_pauli, sign_pauli, two_qubit_candidates, embed

from helpers import dense_label, random_mps, random_state_vector

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
LN2 = np.log(2)
seeds = st.integers(0, 2**32 - 1)


def dense_entropy(psi, n, cut):
    s = np.linalg.svd(psi.reshape(2**cut, 2 ** (n - cut)), compute_uv=False)
    p = s**2
    p = p[p > 1e-16]
    return float(-(p * np.log(p)).sum())


def bell_state():
    psi = product_state([0, 0])
    psi.apply_two_site_gate(CNOT @ np.kron(H, np.eye(2)), 0)
    return psi


class TestConstruction:
    def test_polarized(self):
        psi = product_state([0, 0, 0, 0])
        for j in range(4):
            assert psi.expect_pauli(PauliString.single(4, j, "Z")) == 1.0
        assert_allclose(psi.entropy_profile(), 0)

    def test_neel(self):
        psi = product_state([0, 1, 0, 1])
        assert sum(psi.expect_pauli(PauliString.single(4, j, "Z")) for j in range(4)) == 0
        assert psi.expect_pauli(PauliString.single(4, 2, "Z")) == 1.0
        assert psi.expect_pauli(PauliString.single(4, 3, "Z")) == -1.0

    def test_bad_bits(self):
        with pytest.raises(ValueError):
            product_state([0, 2])
        with pytest.raises(ValueError):
            product_state([])

    def test_boundary_check(self):
        with pytest.raises(ValueError):
            MPS([np.zeros((2, 2, 1))])

    @pytest.mark.parametrize("n", [2, 5, 8])
    def test_from_dense_roundtrip(self, n, rng):
        v = random_state_vector(n, rng)
        psi = MPS.from_dense(v, n)
        assert_allclose(psi.to_dense(), v, atol=1e-12)
        assert psi.check_isometries()

    def test_dump_json(self, tmp_path, rng):
        psi = random_mps(5, 4, rng)
        psi.dump_json(tmp_path / "s.json")
        data = json.loads((tmp_path / "s.json").read_text())
        assert data["bond_dims"] == psi.bond_dims


class TestCanonical:
    @given(seeds, st.integers(2, 8))
    @settings(max_examples=25, deadline=None)
    def test_gauge_invariance(self, seed, n):
        rng = np.random.default_rng(seed)
        psi = random_mps(n, 16, rng)
        before = psi.to_dense()
        for target in rng.integers(0, n, 4):
            psi.move_center(int(target))
            assert psi.check_isometries(1e-10)
            assert_allclose(psi.to_dense(), before, atol=1e-12)
            assert abs(psi.norm() - 1) < 1e-10

    def test_move_to_current_is_noop(self, rng):
        psi = random_mps(5, 4, rng, center=2)
        tensors = [a.copy() for a in psi.tensors]
        psi.move_center(2)
        for a, b in zip(tensors, psi.tensors):
            assert np.array_equal(a, b)

    def test_product_state_bonds_stay_one(self):
        psi = product_state([0, 1, 1, 0, 1])
        psi.move_center(4)
        psi.move_center(1)
        assert psi.bond_dims == [1, 1, 1, 1]

    def test_random_chi8_n6(self, rng):
        psi = random_mps(6, 8, rng)
        v = psi.to_dense()
        psi.move_center(5)
        assert_allclose(psi.to_dense(), v, atol=1e-12)

    @pytest.mark.parametrize("chi", [2, 4, 64])
    def test_pad_bonds(self, chi):
        psi = product_state([0, 1, 0, 0, 1, 1])
        v = psi.to_dense()
        psi.pad_bonds(chi)
        assert psi.bond_dims == [min(2 ** min(j + 1, 5 - j), chi) for j in range(5)]
        assert psi.check_isometries()
        assert_allclose(psi.to_dense(), v, atol=1e-12)


class TestGates:
    def test_identity_gate(self, rng):
        psi = random_mps(5, 4, rng, center=2)
        v = psi.to_dense()
        rep = psi.apply_two_site_gate(np.eye(4), 2)
        assert rep.discarded_weight == 0
        assert_allclose(psi.to_dense(), v, atol=1e-12)

    def test_cnot_basis(self):
        psi = product_state([1, 0])
        psi.apply_two_site_gate(CNOT, 0)
        expect = np.zeros(4)
        expect[3] = 1
        assert_allclose(abs(psi.to_dense()), expect, atol=1e-14)
        assert psi.bond_entropy(0) < 1e-14

    def test_bell(self):
        psi = bell_state()
        assert abs(psi.bond_entropy(0) - LN2) < 1e-14
        assert_allclose(psi.to_dense(), np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-14)

    def test_ghz_middle(self):
        psi = product_state([0, 0, 0, 0])
        psi.apply_two_site_gate(CNOT @ np.kron(H, np.eye(2)), 0)
        psi.apply_two_site_gate(CNOT, 1)
        psi.apply_two_site_gate(CNOT, 2)
        v = psi.to_dense()
        assert abs(dense_entropy(v, 4, 2) - LN2) < 1e-12
        psi.move_center(1)
        assert abs(psi.bond_entropy(1) - LN2) < 1e-12

    def test_requires_adjacent_center(self, rng):
        psi = random_mps(5, 4, rng, center=0)
        with pytest.raises(ValueError):
            psi.apply_two_site_gate(np.eye(4), 3)
        with pytest.raises(ValueError):
            psi.apply_two_site_gate(np.ones((4, 4)), 0)

    def test_truncation_reported(self, rng):
        psi = random_mps(6, 8, rng, center=2)
        psi.chi_max = 4
        rep = psi.apply_two_site_gate(candidate_unitaries()[100], 2)
        assert rep.new_dim == 4 and rep.discarded_weight > 0
        assert abs(psi.norm() - 1) < 1e-12

    def test_no_truncation_when_rank_fits(self, rng):
        psi = random_mps(6, 64, rng, center=2)
        for u in candidate_unitaries()[::97]:
            psi.move_center(2)
            assert psi.apply_two_site_gate(u, 2).discarded_weight == 0

    @given(seeds)
    @settings(max_examples=15, deadline=None)
    def test_clifford_expectations_covariant(self, seed):
        rng = np.random.default_rng(seed)
        n = 5
        psi = random_mps(n, 64, rng, center=1)
        p = PauliString(rng.integers(0, 2, n), rng.integers(0, 2, n))
        before = psi.expect_pauli(p)
        g = two_qubit_candidates()[rng.integers(720)]
        psi.apply_two_site_gate(g.unitary, 1)
        assert abs(psi.norm() - 1) < 1e-10
        after = psi.expect_pauli(conjugate_pauli(embed(g.tableau, 1, n), p))
        assert abs(after - before) < 1e-10


class TestEntropy:
    def test_zero_terms(self):
        assert entropy_from_schmidt(np.array([1.0, 0.0, 1e-9])) == 0.0

    def test_product(self):
        assert product_state([0, 1, 1]).midpoint_entropy() == 0.0

    def test_identity_matches_bond_entropy(self, rng):
        psi = random_mps(6, 8, rng, center=2)
        theta = psi.two_site_theta(2)
        assert abs(entropy_after_gate(theta, np.eye(4)) - psi.bond_entropy(2)) < 1e-12

    def test_bell_disentangled(self):
        psi = bell_state()
        theta = psi.two_site_theta(0)
        u = (CNOT @ np.kron(H, np.eye(2))).conj().T
        assert entropy_after_gate(theta, u) < 1e-12

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_scan_matches_commit(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_mps(6, 64, rng, center=3)
        theta = psi.two_site_theta(2)
        k = int(rng.integers(720))
        u = candidate_unitaries()[k]
        predicted = entropy_after_gate(theta, u)
        psi.apply_two_site_gate(u, 2)
        assert abs(psi.bond_entropy(2) - predicted) < 1e-12

    def test_batched_equals_single(self, rng):
        theta = random_mps(6, 8, rng, center=2).two_site_theta(2)
        us = candidate_unitaries()
        batch = entropies_after_gates(theta, us)
        single = np.array([entropy_after_gate(theta, u) for u in us[::17]])
        assert_allclose(batch[::17], single, atol=1e-12)

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_sign_independence(self, seed):
        rng = np.random.default_rng(seed)
        theta = rng.normal(size=(2, 4, 4)) + 1j * rng.normal(size=(2, 4, 4))
        theta /= np.linalg.norm(theta)
        u = candidate_unitaries()[rng.integers(720)]
        ref = entropy_after_gate(theta, u)
        for k in range(16):
            assert abs(entropy_after_gate(theta, pauli_matrix(sign_pauli(k)) @ u) - ref) < 1e-12

    @pytest.mark.parametrize("cut", [1, 2, 3, 4])
    def test_profile_against_dense(self, cut, rng):
        psi = random_mps(5, 4, rng, center=4)
        v = psi.to_dense()
        assert abs(psi.entropy_profile()[cut - 1] - dense_entropy(v, 5, cut)) < 1e-12


class TestTheta:
    def test_product_unit_bonds(self):
        theta = product_state([0, 1, 0]).two_site_theta(0)
        assert theta.shape == (1, 4, 1)

    def test_norm(self, rng):
        psi = random_mps(4, 4, rng, center=1)
        assert abs(np.linalg.norm(psi.two_site_theta(1)) - 1) < 1e-12

    def test_svd_reconstruction(self, rng):
        psi = random_mps(4, 4, rng, center=1)
        v = psi.to_dense()
        theta = psi.two_site_theta(1)
        l, _, r = theta.shape
        u, s, vh = np.linalg.svd(theta.reshape(2 * l, 2 * r), full_matrices=False)
        psi.tensors[1] = (u * s).reshape(l, 2, -1)
        psi.tensors[2] = vh.reshape(-1, 2, r)
        assert_allclose(psi.to_dense(), v, atol=1e-12)


class TestExpect:
    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_three_site_paulis_against_dense(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        psi = random_mps(n, 8, rng, center=int(rng.integers(n)))
        v = psi.to_dense()
        sites = sorted(rng.choice(n, 3, replace=False))
        lab = ["I"] * n
        for s in sites:
            lab[s] = "XYZ"[rng.integers(3)]
        lab = "".join(lab)
        dense = float(np.vdot(v, dense_label(lab) @ v).real)
        assert abs(psi.expect_pauli(pauli_from_labels(lab)) - dense) < 1e-12

    def test_sign_included(self):
        psi = product_state([0, 0])
        assert psi.expect_pauli(pauli_from_labels("ZI", -1)) == -1.0
