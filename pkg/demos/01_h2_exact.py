"""
The two-qubit H2 Hamiltonian
============================

Build the Hamiltonian, look at its measurement groups, and diagonalise it.
"""

# %%
import numpy as np

from shotmeta import exact_spectrum, ground_state, h2_hamiltonian, shots_for_accuracy

h = h2_hamiltonian()
for term in h.terms:
    print(f"{term.coefficient:+.5f}  {term.word.factors}")

# %%
# Terms that commute qubit-wise share a measurement setting. Each group's
# weight is the root-sum-square of its coefficients.
for g in h.groups:
    print(g.basis_label, [t.word.factors for t in g.terms], round(g.weight, 6))

# %%
print("spectrum:", np.round(exact_spectrum(h), 6))
e0, vec = ground_state(h)
print("ground energy:", e0)
print("ground state (|q1 q0>):", np.round(vec.real, 5))

# %%
# Shots needed for a one-standard-error accuracy of 1.5 mHa.
print(shots_for_accuracy(h, 0.0015))
