"""
Symmetric means along an orbit
==============================

For fixed m, M_m of the first n values tends to the mean of f. At the other
end, M_(n-m) tends to exp of the integral of log f.
"""

# %%
import math

from permflow import ProcessSpec, checkpoint_schedule, median_final, run_seeds
from permflow.experiment import run_symmetric_mean_high, run_symmetric_mean_low

low_spec = ProcessSpec("IID", 1, {"low": 0.0, "high": 2.0}, 42)
runs = run_seeds(run_symmetric_mean_low, low_spec, 3, checkpoint_schedule(10**5))
print("M_3, median final |M_3 - 1|:", median_final(runs, "abs_err"))

# %% [markdown]
# The top end only keeps the running log-sum and the streaming E_m of 1/f,
# which is O(m) state per step.

# %%
high_spec = ProcessSpec("IID", 1, {"low": 1.0, "high": 3.0}, 42)
runs = run_seeds(run_symmetric_mean_high, high_spec, 2, checkpoint_schedule(10**5))
target = runs[0][-1].target
print(f"target exp(int log f) = {target:.6f} (closed form {math.exp((3 * math.log(3) - 2) / 2):.6f})")
print("median final rel_err:", median_final(runs))
