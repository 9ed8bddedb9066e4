"""
Fitting p_s(n) = a (1 - exp(-b n)) + c
======================================

The model is linear in (a, c) once b is fixed, so the fit scans b on a log
grid and refines the best bracket.
"""

# %%
import numpy as np

from shotmeta import SuccessSample, eval_curve, fit_success_curve

a, b, c = 0.3416, 3.6e-6, 0.0
ns = [10**4, 3 * 10**4, 10**5, 3 * 10**5, 10**6, 10**7]
rng = np.random.default_rng(0)
samples = [SuccessSample(n, 1000, {0.0015: int(rng.binomial(1000, a * (1 - np.exp(-b * n)) + c))}) for n in ns]

# %%
curve = fit_success_curve(samples, 0.0015)
print(f"a={curve.a:.4f}  b={curve.b:.3e}  c={curve.c:.2e}  residual={curve.fit_residual:.2e}")
for s in samples:
    print(f"{s.n:>9}  data {s.fraction(0.0015):.3f}  model {eval_curve(curve, s.n):.3f}")
