"""
Final estimation at chemical precision
======================================

Sample the exact ground state many times and compare the spread of the
estimates with the shot-count bound.
"""

# %%
import numpy as np

from shotmeta import accuracy_for_shots, final_estimate, ground_state, h2_hamiltonian

h = h2_hamiltonian()
e0, vec = ground_state(h)
# Ry(theta0) then CNOT reaches the ground state; theta0 from its two amplitudes
theta = np.zeros(8)
theta[0] = 2 * np.arctan2(vec[3].real, vec[0].real)

m = 251424
values = np.array([final_estimate(theta, h, m, np.random.default_rng(s)).value for s in range(300)])

# %%
print("bound   :", accuracy_for_shots(h, m))
print("spread  :", values.std(ddof=1))
print("coverage:", np.mean(np.abs(values - e0) <= 0.0015))
