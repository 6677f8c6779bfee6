"""Shared oracles and comparison helpers for the test suite."""

import itertools
import math

import numpy as np


def close(a, b, rel, scale=None):
    """|a - b| <= rel * max(|a|, |b|, scale)."""
    s = max(abs(a), abs(b), scale or 0.0)
    return abs(a - b) <= rel * s


def subset_sums_bruteforce(A):
    """s_I by an explicit loop over subsets, columns and rows."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    out = {}
    for mask in range(1, 1 << m):
        total = 0.0
        for j in range(n):
            prod = 1.0
            for i in range(m):
                if mask >> i & 1:
                    prod *= A[i, j]
            total += prod
        out[mask] = total
    return out


def partitions_recursive(elements):
    """Set partitions of a list, built by placing the first element."""
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for smaller in partitions_recursive(rest):
        for k in range(len(smaller)):
            yield smaller[:k] + [[first] + smaller[k]] + smaller[k + 1 :]
        yield [[first]] + smaller


def elementary_bruteforce(x, k):
    return math.fsum(math.prod(c) for c in itertools.combinations(x, k))


def binet_m3(S):
    """Binet's 1812 relation for three rows, written out term by term."""
    s1, s2, s3 = S[0b001], S[0b010], S[0b100]
    s12, s13, s23, s123 = S[0b011], S[0b101], S[0b110], S[0b111]
    return s1 * s2 * s3 - s1 * s23 - s2 * s13 - s3 * s12 + 2 * s123


def binet_m3_magnitude(S):
    s1, s2, s3 = S[0b001], S[0b010], S[0b100]
    s12, s13, s23, s123 = S[0b011], S[0b101], S[0b110], S[0b111]
    return sum(abs(t) for t in (s1 * s2 * s3, s1 * s23, s2 * s13, s3 * s12, 2 * s123))
