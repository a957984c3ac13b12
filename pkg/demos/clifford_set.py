"""The 720 positive-sign two-qubit Clifford tableaux.

Counts the set, shows a few members with their synthesized circuits, and
checks one unitary against its tableau by conjugating all 16 Paulis.
"""
import numpy as np

from clifford_tdvp.oracle import pauli_matrix
from clifford_tdvp.tableau import conjugate_pauli, sign_pauli, synthesize_circuit, two_qubit_candidates

gates = two_qubit_candidates()
print(f"{len(gates)} candidates, {len({g.tableau.to_hex() for g in gates})} distinct tableaux")

for g in gates[:: 240]:
    images = [p.label() for p in g.tableau.generator_images()]
    print(f"id {g.candidate_id:3d}  X0,X1,Z0,Z1 -> {images}  circuit {' '.join(synthesize_circuit(g.tableau))}")

g = gates[417]
worst = 0.0
for k in range(16):
    p = sign_pauli(k)
    lhs = g.unitary @ pauli_matrix(p) @ g.unitary.conj().T
    worst = max(worst, np.abs(lhs - pauli_matrix(conjugate_pauli(g.tableau, p))).max())
print(f"candidate 417: max |U P U^dag - C(P)| over 16 Paulis = {worst:.1e}")
