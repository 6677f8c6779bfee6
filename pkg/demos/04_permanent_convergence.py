"""
Permanents of ergodic matrices
==============================

Put f(w), f(Tw), ..., f(T^(n-1) w) in the columns of an m x n matrix. The
permanent divided by n(n-1)...(n-m+1) tends to the product of the
coordinate integrals. Subset sums are updated column by column, so the
matrix is never stored.
"""

# %%
from permflow import ProcessSpec, checkpoint_schedule, median_final, run_permanent_convergence, run_seeds

spec = ProcessSpec("IID", 3, {"low": 0.0, "high": 2.0}, 42)
records = run_permanent_convergence(spec, checkpoint_schedule(10**5, factor=3.0))
print(f"{'n':>7} {'observed':>10} {'rel_err':>10}")
for r in records:
    print(f"{r.n:7d} {r.observed:10.5f} {r.rel_err:10.2e}")

# %% [markdown]
# Eleven seeds, median of the final relative error.

# %%
for spec in (spec, ProcessSpec("Rotation", 3, {"c": [1.0, 2.0, 0.5]}, 42)):
    runs = run_seeds(run_permanent_convergence, spec, checkpoint_schedule(10**5))
    print(spec.kind.value, "median final rel_err:", median_final(runs))
