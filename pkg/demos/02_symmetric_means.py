"""
Symmetric means
===============

M_k(x) = (E_k(x) / C(n, k))^(1/k) interpolates between the arithmetic mean
(k = 1) and the geometric mean (k = n), and never increases in k.
"""

# %%
import numpy as np

from permflow import symmetric_mean, symmetric_mean_profile
from permflow.perm_core import permanent_binet_minc, subset_sums
from permflow.sym_means import elementary_from_power_sums, elementary_symmetric, power_sums

x = np.random.default_rng(3).uniform(0.2, 4.0, 12)
prof = symmetric_mean_profile(x)
print("M_1 .. M_n:", np.round(prof.values, 4))
print("arithmetic", prof.arithmetic, "geometric", prof.geometric)
print("violations of monotonicity:", prof.maclaurin_violations())

# %% [markdown]
# Large inputs are handled in mantissa-exponent form, so E_k can exceed the
# double range while M_k stays an ordinary number.

# %%
big = np.full(10_000, 1000.0)
E = elementary_symmetric(big, 200)
print("log E_200 =", E.log_abs(), " float(E_200) =", float(E))
print("M_200 =", symmetric_mean(big, 200))

# %% [markdown]
# Reversing the roles of x and 1/x: E_{n-m}(x) = E_n(x) E_m(1/x), hence
# M_{n-m}(x) = M_n(x)^(n/(n-m)) M_m(1/x)^(m/(n-m)).
# The factor M_n^(m/(n-m)) is easy to forget; without it the ratio is wrong.

# %%
n, m = len(x), 3
left = symmetric_mean(x, n - m)
right = symmetric_mean(x, n) ** (n / (n - m)) * symmetric_mean(1 / x, m) ** (m / (n - m))
short = symmetric_mean(x, n) * symmetric_mean(1 / x, m) ** (m / (n - m))
print(f"M_(n-m) = {left:.15f}")
print(f"with the geometric factor    {right:.15f}")
print(f"without it                   {short:.15f}")

# %% [markdown]
# A matrix with m identical rows x has permanent m! E_m(x). Newton's
# identities give E_m from power sums as well.

# %%
import math

row = x[:8]
for k in (2, 4):
    per = permanent_binet_minc(subset_sums(np.tile(row, (k, 1))))
    print(k, per, math.factorial(k) * float(elementary_symmetric(row, k)), elementary_from_power_sums(power_sums(row, k)) * math.factorial(k))
