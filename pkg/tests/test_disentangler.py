import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from clifford_tdvp.disentangler import CoolingConfig, bilayer_schedule, cooling_sweep, optimize_bond
from clifford_tdvp.mps import MPS, entropy_from_schmidt, product_state
from clifford_tdvp.oracle import pauli_matrix
from clifford_tdvp.pauli import PauliString
from clifford_tdvp.tableau import candidate_unitaries, conjugate_pauli

from helpers import gate_unitary, random_circuit, random_mps, report_unitary

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
seeds = st.integers(0, 2**32 - 1)


def stabilizer_mps(n, rng, depth=2):
    _, u = random_circuit(n, rng, depth)
    v = u[:, 0]
    return MPS.from_dense(v, n), v


class TestOptimizeBond:
    def test_bell(self):
        psi = product_state([0, 0])
        psi.apply_two_site_gate(CNOT @ np.kron(H, np.eye(2)), 0)
        _, rec = optimize_bond(psi, 0, np.random.default_rng(0))
        assert rec.entropy_before > 0.69
        assert rec.entropy_after < 1e-12
        assert psi.bond_entropy(0) < 1e-12

    def test_product_bond_skipped(self):
        psi = product_state([0, 1, 0])
        rng = np.random.default_rng(0)
        state = rng.bit_generator.state
        t, rec = optimize_bond(psi, 0, rng)
        assert rec.skipped and t.is_identity() and rec.entropy_after == 0
        assert rng.bit_generator.state == state

    def test_all_two_qubit_stabilizer_states(self):
        # every candidate applied to |00> gives each stabilizer state (up to Paulis)
        rng = np.random.default_rng(0)
        seen = {}
        for u in candidate_unitaries():
            v = u[:, 0]
            key = np.round(np.outer(v, v.conj()), 8).tobytes()
            seen.setdefault(key, v)
        assert len(seen) == 60
        for v in seen.values():
            psi = MPS.from_dense(v, 2)
            _, rec = optimize_bond(psi, 0, rng)
            assert psi.bond_entropy(0) < 1e-12
            assert rec.entropy_after < 1e-12

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_scan_minimum_and_monotone(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_mps(6, 8, rng, center=2)
        theta = psi.two_site_theta(2)
        l = theta.shape[0]
        brute = min(
            entropy_from_schmidt(np.linalg.svd(np.einsum("ts,asc->atc", u, theta).reshape(2 * l, -1), compute_uv=False))
            for u in candidate_unitaries()
        )
        _, rec = optimize_bond(psi, 2, rng)
        assert abs(rec.entropy_after - brute) < 1e-12
        assert rec.entropy_after <= rec.entropy_before + 1e-12
        assert rec.n_ties >= 1

    def test_sign_does_not_change_values(self, rng):
        psi0 = random_mps(5, 4, rng, center=1)
        values = set()
        for seed in range(8):
            psi = psi0.copy()
            _, rec = optimize_bond(psi, 1, np.random.default_rng(seed))
            values.add((round(rec.entropy_before, 12), round(rec.entropy_after, 12)))
        assert len(values) == 1

    def test_committed_tableau_matches_state(self, rng):
        n = 5
        psi = random_mps(n, 16, rng, center=2)
        v = psi.to_dense()
        t, rec = optimize_bond(psi, 2, rng)
        u = gate_unitary(rec, n)
        assert_allclose(psi.to_dense(), u @ v, atol=1e-12)
        for _ in range(5):
            p = PauliString(rng.integers(0, 2, n), rng.integers(0, 2, n))
            assert_allclose(u @ pauli_matrix(p) @ u.conj().T, pauli_matrix(conjugate_pauli(t, p)), atol=1e-12)


class TestCoolingSweep:
    def test_zero_layers(self, rng):
        psi = random_mps(5, 4, rng)
        v = psi.to_dense()
        t, rep = cooling_sweep(psi, CoolingConfig(d_layers=0), rng)
        assert t.is_identity() and not rep.records
        assert_allclose(psi.to_dense(), v, atol=1e-12)

    def test_schedule(self):
        assert bilayer_schedule(6, 0) == [1, 3, 0, 2, 4]
        assert bilayer_schedule(6, 1) == [3, 1, 4, 2, 0]
        assert bilayer_schedule(2, 0) == [0]

    def test_records_follow_schedule(self, rng):
        psi = random_mps(6, 8, rng)
        _, rep = cooling_sweep(psi, CoolingConfig(d_layers=2), rng)
        assert [r.bond for r in rep.records] == bilayer_schedule(6, 0) + bilayer_schedule(6, 1)
        assert psi.center == 0

    def test_deterministic(self):
        out = []
        for _ in range(2):
            psi = random_mps(6, 8, np.random.default_rng(4))
            t, rep = cooling_sweep(psi, CoolingConfig(d_layers=2, rng_seed=9))
            out.append((t.to_hex(), [(r.candidate_id, r.sign_pauli_id) for r in rep.records]))
        assert out[0] == out[1]

    def test_depth2_circuit_round_trip(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            psi, _ = stabilizer_mps(6, rng, depth=2)
            cooling_sweep(psi, CoolingConfig(d_layers=2), rng)
            assert psi.entropy_profile().max() < 1e-10

    def test_stabilizer_inputs_fully_cooled(self):
        rng = np.random.default_rng(5)
        ok = 0
        trials = 40
        for _ in range(trials):
            n = int(rng.integers(2, 7))
            psi, _ = stabilizer_mps(n, rng, depth=int(rng.integers(1, n + 1)))
            cooling_sweep(psi, CoolingConfig(d_layers=n), rng)
            ok += psi.entropy_profile().max() < 1e-10
        assert ok >= 0.95 * trials, f"{trials - ok} of {trials} trials not fully cooled"

    @given(seeds)
    @settings(max_examples=10, deadline=None)
    def test_global_state_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        psi = random_mps(n, 64, rng)
        before = psi.to_dense()
        t, rep = cooling_sweep(psi, CoolingConfig(d_layers=2), rng)
        u = report_unitary(rep, n)
        assert_allclose(u.conj().T @ psi.to_dense(), before, atol=1e-10)
        for _ in range(4):
            p = PauliString(rng.integers(0, 2, n), rng.integers(0, 2, n))
            assert_allclose(u @ pauli_matrix(p) @ u.conj().T, pauli_matrix(conjugate_pauli(t, p)), atol=1e-12)
        assert all(r.entropy_after <= r.entropy_before + 1e-12 for r in rep.records)

    def test_report_fields(self, rng):
        psi = random_mps(6, 8, rng)
        t, rep = cooling_sweep(psi, CoolingConfig(), rng)
        assert rep.tableau_hex == t.to_hex()
        assert np.isfinite(rep.entropy_mid_before) and np.isfinite(rep.entropy_mid_after)
        assert rep.discarded_weight == 0.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CoolingConfig(d_layers=-1)
        with pytest.raises(ValueError):
            CoolingConfig(tie_tolerance=-1)
