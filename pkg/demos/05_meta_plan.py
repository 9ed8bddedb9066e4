"""
Spending a shot budget
======================

Given a success curve, split a budget B into r repetitions of n optimizer
shots plus m final-estimation shots each.
"""

# %%
from shotmeta import SuccessCurve, h2_hamiltonian, optimize_plan, probability_surface

h = h2_hamiltonian()
curve = SuccessCurve(0.4995, 1.46e-5, 0.0, accuracy_d=0.0045)
plan = optimize_plan(curve, h, 5_000_000, 0.0045)
print(plan)

# %%
# One repetition gets at most p_s; repeating helps until m gets too small to
# tell the runs apart.
rows = probability_surface(curve, h, 5_000_000, 0.0045, r_max=12)
best = {}
for row in rows:
    if row["feasible"] and row["P_reliable"] > best.get(row["r"], (0,))[0]:
        best[row["r"]] = (row["P_reliable"], row["m"], row["n"])
for r, (p, m, n) in sorted(best.items()):
    print(f"r={r:>2}  P_reliable={p:.4f}  m={m:>8}  n={n:>8}")

# %%
# Running the plan takes a few seconds per repetition:
# from shotmeta import run_campaign
# result = run_campaign(plan, h, master_seed=0)
