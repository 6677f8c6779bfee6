"""
Quantities that vanish
======================

Three ratios go to zero along typical orbits: subset sums over two or more
rows divided by n^|I|, heavy-tailed sums scaled by n^(-1/p), and the
running maximum divided by n.
"""

# %%
from permflow import ProcessSpec, checkpoint_schedule, loglog_slope, record_at, run_seeds
from permflow.experiment import run_aaronson_ratio, run_max_ratio, run_subset_ratio

iid = ProcessSpec("IID", 3, {"low": 0.0, "high": 2.0}, 42)
sched = checkpoint_schedule(10**5, include=[1000])
for rows in ([0, 1], [0, 1, 2]):
    recs = run_subset_ratio(iid, rows, sched)
    print(f"rows {rows}: n=1e3 {record_at(recs, 1000).observed:.3e}  n=1e5 {recs[-1].observed:.3e}  slope {loglog_slope(recs, 100):.2f}")

# %% [markdown]
# Pareto with tail index 0.8 has no mean, yet with p = 0.6 the scaled sum
# n^(-1/p) S_n still decays. Asking for p above the tail index raises a flag.

# %%
pareto = ProcessSpec("ParetoTail", 1, {"alpha_tail": 0.8}, 42)
sched6 = checkpoint_schedule(10**6, include=[1000])
runs = run_seeds(run_aaronson_ratio, pareto, 0.6, sched6)
print("seeds decreasing from n=1e3 to 1e6:", sum(record_at(r, 1000).observed > r[-1].observed for r in runs), "of 11")

import warnings

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    flagged = run_aaronson_ratio(pareto, 0.9, [10])
print(flagged[0].flags, caught[0].message)

# %%
runs = run_seeds(run_max_ratio, ProcessSpec("ParetoTail", 1, {"alpha_tail": 1.5}, 42), sched6)
print("max/n decreasing:", sum(record_at(r, 1000).observed > r[-1].observed for r in runs), "of 11")
