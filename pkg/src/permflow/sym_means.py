"""Elementary symmetric polynomials and symmetric means without overflow.

E_k(x_1..x_n) grows like C(n, k) * mean^k, which leaves double range for
modest n. Values are therefore carried as ``mantissa * 2**exponent`` with
the exponent an unbounded Python int.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .perm_core import DEFAULT_CAPS, FACTORIALS, Caps, _check_partition_m, partition_table

__all__ = [
    "ScaledReal",
    "ElementaryAccumulator",
    "SymmetricMeanProfile",
    "elementary_symmetric",
    "elementary_symmetric_all",
    "log_binomial",
    "symmetric_mean",
    "symmetric_mean_profile",
    "elementary_from_power_sums",
    "power_sums",
    "parse_vector_csv",
    "read_vector_csv",
]

LO = 2.0**-512
HI = 2.0**512
LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScaledReal:
    """``mantissa * 2**exponent``."""

    mantissa: float
    exponent: int = 0

    @classmethod
    def from_float(cls, x: float) -> "ScaledReal":
        m, e = math.frexp(x)
        return cls(m, e)

    def __float__(self):
        try:
            return math.ldexp(self.mantissa, self.exponent)
        except OverflowError:
            return math.copysign(math.inf, self.mantissa)

    @property
    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def log_abs(self) -> float:
        """log|value|, -inf for zero."""
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exponent * LN2


def _add_scaled(ma, ea, mb, eb):
    """(ma * 2**ea) + (mb * 2**eb), aligned on the larger exponent."""
    if ma == 0.0:
        return mb, eb
    if mb == 0.0:
        return ma, ea
    if ea >= eb:
        return ma + math.ldexp(mb, eb - ea), ea
    return math.ldexp(ma, ea - eb) + mb, eb


class ElementaryAccumulator:
    """Streaming E_0..E_degree of the values pushed so far.

    Each push costs O(degree). Mantissas are renormalized only when they
    leave [2^-512, 2^512], so while no rescaling happens E_1 is the plain
    left-to-right float sum of the inputs.
    """

    def __init__(self, degree: int):
        if degree < 0:
            raise DomainError("degree must be nonnegative")
        self.degree = degree
        self.count = 0
        self._mant = [1.0] + [0.0] * degree
        self._expo = [0] * (degree + 1)

    def push(self, x: float) -> None:
        x = float(x)
        if not math.isfinite(x):
            raise InputError("values must be finite")
        mant, expo = self._mant, self._expo
        for k in range(min(self.degree, self.count + 1), 0, -1):
            term = x * mant[k - 1]
            m, e = _add_scaled(mant[k], expo[k], term, expo[k - 1])
            if m != 0.0 and not LO <= abs(m) <= HI:
                f, d = math.frexp(m)
                m, e = f, e + d
            mant[k], expo[k] = m, e
        self.count += 1

    def extend(self, xs) -> None:
        for x in np.asarray(xs, dtype=float).ravel().tolist():
            self.push(x)

    def __getitem__(self, k: int) -> ScaledReal:
        return ScaledReal(self._mant[k], self._expo[k])

    def symmetric_mean(self, k: int | None = None) -> float:
        k = self.degree if k is None else k
        return _mean_from_scaled(self[k], self.count, k)


def _validate_vector(x) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(a)):
        raise InputError("values must be finite")
    return a


def elementary_symmetric_all(x, kmax: int | None = None):
    """E_0..E_kmax of ``x`` as (mantissas, exponents) arrays.

    One pass over x; every coefficient is updated per element, so the cost
    is O(n * kmax) vectorized numpy work.
    """
    a = _validate_vector(x)
    n = len(a)
    kmax = n if kmax is None else kmax
    if not 0 <= kmax <= n:
        raise DomainError(f"need 0 <= k <= n, got k={kmax}, n={n}")
    mant = np.zeros(kmax + 1)
    expo = np.zeros(kmax + 1, dtype=np.int64)
    mant[0] = 1.0
    for j, xj in enumerate(a):
        top = min(kmax, j + 1)
        if top == 0:
            continue
        lo_m, lo_e = mant[:top] * xj, expo[:top]
        hi_m, hi_e = mant[1 : top + 1], expo[1 : top + 1]
        # empty slots must not drag the common exponent down
        hi_e_eff = np.where(hi_m == 0.0, lo_e, hi_e)
        lo_e_eff = np.where(lo_m == 0.0, hi_e_eff, lo_e)
        big = np.maximum(hi_e_eff, lo_e_eff)
        total = np.ldexp(hi_m, (hi_e - big).astype(np.int32)) + np.ldexp(
            lo_m, (lo_e - big).astype(np.int32)
        )
        f, d = np.frexp(total)
        mant[1 : top + 1] = f
        expo[1 : top + 1] = np.where(f == 0.0, 0, big + d)
    return mant, expo


def elementary_symmetric(x, k: int) -> ScaledReal:
    """E_k(x) as a :class:`ScaledReal`; convert with ``float()`` if it fits."""
    a = _validate_vector(x)
    if not 0 <= k <= len(a):
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={len(a)}")
    if k <= 16:
        acc = ElementaryAccumulator(k)
        acc.extend(a)
        return acc[k]
    mant, expo = elementary_symmetric_all(a, k)
    return ScaledReal(float(mant[k]), int(expo[k]))


def log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _mean_from_scaled(E: ScaledReal, n: int, k: int) -> float:
    if k < 1 or k > n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if E.mantissa == 0.0:
        return 0.0
    if E.mantissa < 0:
        raise DomainError("symmetric mean of a negative elementary symmetric value")
    log_c = log_binomial(n, k)
    value = float(E)
    if math.isfinite(value) and value > 1e-300 and log_c < 700.0:
        # stay linear while everything fits; k = 1 is then exactly sum / n
        return (value / float(math.comb(n, k))) ** (1.0 / k)
    return math.exp((E.log_abs() - log_c) / k)


def _nonnegative(x) -> np.ndarray:
    a = _validate_vector(x)
    if len(a) == 0:
        raise DomainError("need at least one value")
    if np.any(a < 0):
        raise DomainError("symmetric means are defined for nonnegative values only")
    return a


def symmetric_mean(x, k: int) -> float:
    """(E_k(x) / C(n, k))^(1/k) for nonnegative x."""
    a = _nonnegative(x)
    return _mean_from_scaled(elementary_symmetric(a, k), len(a), k)


@dataclass(frozen=True)
class SymmetricMeanProfile:
    """M_1..M_n of one sample; index 0 holds M_1."""

    n: int
    values: np.ndarray
    log_values: np.ndarray

    @property
    def arithmetic(self) -> float:
        return float(self.values[0])

    @property
    def geometric(self) -> float:
        return float(self.values[-1])

    def maclaurin_violations(self, slack: float = 1e-12) -> list:
        """Indices k (1-based) with M_{k+1} > M_k + slack * max(1, M_k)."""
        v = self.values
        bad = v[1:] > v[:-1] + slack * np.maximum(1.0, v[:-1])
        return [int(k) + 1 for k in np.flatnonzero(bad)]


def symmetric_mean_profile(x) -> SymmetricMeanProfile:
    a = _nonnegative(x)
    n = len(a)
    mant, expo = elementary_symmetric_all(a, n)
    logs = np.full(n, -math.inf)
    vals = np.zeros(n)
    for k in range(1, n + 1):
        E = ScaledReal(float(mant[k]), int(expo[k]))
        vals[k - 1] = _mean_from_scaled(E, n, k)
        if vals[k - 1] > 0:
            logs[k - 1] = math.log(vals[k - 1])
    return SymmetricMeanProfile(n, vals, logs)


def power_sums(x, m: int) -> list:
    """p_1..p_m with p_k = sum_j x_j^k."""
    a = _validate_vector(x)
    return [math.fsum(a**k) for k in range(1, m + 1)]


def elementary_from_power_sums(p, caps: Caps | None = None) -> float:
    """E_m from power sums p_1..p_m by the partition expansion with equal rows:

        m! E_m = sum over partitions P of (-1)^(m-|P|) prod_{I in P} (|I|-1)! p_|I|
    """
    p = [float(v) for v in p]
    m = len(p)
    _check_partition_m(m, caps or DEFAULT_CAPS)
    masks, nblocks = partition_table(m)
    sizes = np.array([bin(i).count("1") for i in range(1 << m)])
    coef = np.array([FACTORIALS[s - 1] * p[s - 1] if s else 1.0 for s in sizes])
    sign = np.where((m - nblocks) % 2 == 0, 1.0, -1.0)
    terms = sign * coef[masks].prod(axis=1)
    return math.fsum(terms) / FACTORIALS[m]


def parse_vector_csv(text: str) -> np.ndarray:
    """Comma- or newline-separated reals; a non-numeric first line is a header."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty vector file")
    fields = lambda ln: [f.strip() for f in ln.split(",") if f.strip()]
    try:
        [float(f) for f in fields(lines[0])]
    except ValueError:
        lines = lines[1:]
    try:
        vals = [float(f) for ln in lines for f in fields(ln)]
    except ValueError as exc:
        raise InputError(f"unparsable vector entry: {exc}") from None
    if not vals:
        raise InputError("vector file has no values")
    return _validate_vector(vals)


def read_vector_csv(path) -> np.ndarray:
    with open(path) as fh:
        return parse_vector_csv(fh.read())
