"""
Permanents of oblong matrices
=============================

Three exact algorithms compute the permanent of an m x n matrix with m <= n.
They should agree, and they differ wildly in cost.
"""

# %%
import numpy as np

from permflow import (
    permanent,
    permanent_binet_minc,
    permanent_naive,
    permanent_ryser_oblong,
    subset_sums,
)

A = np.array([[1.0, 2.0], [3.0, 4.0]])
print("per [[1,2],[3,4]] =", permanent_naive(A))  # 1*4 + 2*3 = 10

# %% [markdown]
# Binet-Minc works from the subset sums s_I = sum_j prod_{i in I} a_ij.
# For three rows it reduces to Binet's relation
# s1 s2 s3 - s1 s23 - s2 s13 - s3 s12 + 2 s123.

# %%
rng = np.random.default_rng(0)
B = rng.uniform(-1, 1, (3, 7))
S = subset_sums(B)
binet = S[0b001] * S[0b010] * S[0b100] - S[0b001] * S[0b110] - S[0b010] * S[0b101] - S[0b100] * S[0b011] + 2 * S[0b111]
print("naive      ", permanent_naive(B))
print("three-row  ", binet)
print("binet-minc ", permanent_binet_minc(S))
print("ryser      ", permanent_ryser_oblong(B))

# %% [markdown]
# The partition expansion costs about 2^m n, so a very wide matrix is cheap.

# %%
import time

wide = rng.uniform(0, 1, (8, 10_000))
t0 = time.perf_counter()
value = permanent(wide)  # picks binet-minc because n >= 2m
print(f"8 x 10000 permanent = {value:.6e} in {time.perf_counter() - t0:.3f} s")
