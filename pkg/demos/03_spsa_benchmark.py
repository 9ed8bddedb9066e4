"""
How often does SPSA reach the ground state?
===========================================

Run a small benchmark with and without shot noise and grade every run by
its exact energy. The acceptance suite does the same at 200-300 trials.
"""

# %%
from shotmeta import ACCURACY_LEVELS, SpsaConfig, h2_hamiltonian, run_benchmark, success_fraction
from shotmeta.pauli import exact_spectrum

h = h2_hamiltonian()
e0 = exact_spectrum(h)[0]
config = SpsaConfig()

# %%
# No shot noise: the optimizer's ceiling.
sv = run_benchmark(config, h, [0], 60, master_seed=1, statevector=True)
print("statevector:", [round(success_fraction(sv, d, e0)[0], 2) for d in ACCURACY_LEVELS])

# %%
# Finite shots. n counts every shot of a run, calibration probes included.
for spe in (16, 256, 4096):
    records = run_benchmark(config, h, [spe], 40, master_seed=1)
    n = records[0].shots_used
    print(f"n={n:>8}", [round(success_fraction(records, d, e0)[0], 2) for d in ACCURACY_LEVELS])
