"""Exact permanents of oblong (m <= n) matrices.

Three independent algorithms live here:

* ``permanent_naive``: direct enumeration of the n(n-1)...(n-m+1)
  injective row-to-column assignments. Slow, but obviously correct, so it
  is the oracle the other two are checked against.
* ``permanent_binet_minc``: signed sum over set partitions of the rows,
  with factors built from the column sums of row products ``s_I``.
  Costs O(2^m n + Bell(m) m), so it is the method of choice when n >> m.
* ``permanent_ryser_oblong``: inclusion-exclusion over column subsets of
  size at most m, traversed in revolving-door order.

Subsets of rows are bitmasks: row ``i`` (0-based) is bit ``i``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import CapExceededError, DimensionError, DomainError, InputError

__all__ = [
    "Caps",
    "DEFAULT_CAPS",
    "OblongMatrix",
    "SubsetSums",
    "SetPartition",
    "as_matrix",
    "permanent_naive",
    "subset_sums",
    "subset_sums_append",
    "subset_sums_extend",
    "enumerate_partitions",
    "partition_table",
    "bell_number",
    "binet_minc_terms",
    "binet_minc_magnitude",
    "permanent_binet_minc",
    "permanent_binet_minc_normalized",
    "permanent_ryser_oblong",
    "revolving_door",
    "falling_power",
    "log_falling_power",
    "parse_matrix_csv",
    "read_matrix_csv",
    "format_matrix_csv",
    "permanent",
]

# Absolute ceiling on the partition sweep; Bell(16) ~ 1.05e10.
MAX_PARTITION_M = 16

# (k-1)! for block sizes k = 1..16, all exact in double precision.
FACTORIALS = tuple(float(math.factorial(k)) for k in range(MAX_PARTITION_M + 1))


@dataclass(frozen=True)
class Caps:
    """Enumeration limits. Callers may pass their own instance anywhere a
    ``caps`` keyword is accepted."""

    naive_terms: int = 10**8
    partition_m: int = 12
    ryser_subsets: int = 10**7

    def __post_init__(self):
        if self.partition_m > MAX_PARTITION_M:
            raise DomainError(f"partition_m may not exceed {MAX_PARTITION_M}")


DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class OblongMatrix:
    """A finite real m x n matrix with 1 <= m <= n."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2:
            raise InputError(f"matrix must be two-dimensional, got shape {a.shape}")
        m, n = a.shape
        if m < 1 or m > n:
            raise InputError(f"need 1 <= m <= n, got m={m}, n={n}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def columns(self) -> np.ndarray:
        """Columns as an (n, m) array."""
        return self.entries.T


def as_matrix(a) -> OblongMatrix:
    if isinstance(a, OblongMatrix):
        return a
    return OblongMatrix(a)


# --------------------------------------------------------------------------
# falling powers


def log_falling_power(n: int, m: int) -> float:
    """log(n (n-1) ... (n-m+1))."""
    if m < 0 or m > n:
        raise DomainError(f"falling power needs 0 <= m <= n, got n={n}, m={m}")
    return math.fsum(math.log(n - k) for k in range(m))


def falling_power(n: int, m: int):
    """n(n-1)...(n-m+1).

    Returned as an exact ``int`` while it fits in a signed 64-bit integer,
    otherwise as a float obtained from :func:`log_falling_power`.
    """
    if m < 0 or m > n:
        raise DomainError(f"falling power needs 0 <= m <= n, got n={n}, m={m}")
    log_value = log_falling_power(n, m)
    if log_value < 63.5 * math.log(2):
        exact = math.perm(n, m)
        if exact < 2**63:
            return exact
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


# --------------------------------------------------------------------------
# naive enumeration


def permanent_naive(a, caps: Caps | None = None, chunk: int = 1 << 16) -> float:
    """Sum over all injections of the products a[0, t(0)] ... a[m-1, t(m-1)]."""
    caps = caps or DEFAULT_CAPS
    A = as_matrix(a)
    m, n = A.shape
    terms = math.perm(n, m)
    if terms > caps.naive_terms:
        raise CapExceededError(
            "naive_terms", caps.naive_terms, terms, "use binet-minc or ryser"
        )
    E = A.entries
    rows = np.arange(m)
    partial = []
    it = itertools.permutations(range(n), m)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.intp)
        partial.append(math.fsum(E[rows, idx].prod(axis=1)))
    return math.fsum(partial)


# --------------------------------------------------------------------------
# subset sums


def _popcounts(m: int) -> np.ndarray:
    pc = np.zeros(1 << m, dtype=np.int64)
    for i in range(m):
        h = 1 << i
        pc[h : 2 * h] = pc[:h] + 1
    return pc


def _column_products(cols: np.ndarray) -> np.ndarray:
    """Products over every row subset for each column of a (k, m) block.

    Built by doubling: prod[I | bit i] = prod[I] * a_i, so the cost per
    column is 2^m multiplications.
    """
    k, m = cols.shape
    P = np.empty((k, 1 << m))
    P[:, 0] = 1.0
    for i in range(m):
        h = 1 << i
        np.multiply(P[:, :h], cols[:, i : i + 1], out=P[:, h : 2 * h])
    return P


@dataclass(frozen=True)
class SubsetSums:
    """Column sums of row-subset products for the columns absorbed so far.

    ``s`` has length 2^m and is indexed by row bitmask. Slot 0 (the empty
    subset) holds the empty-product sum, which is just ``n``; the 2^m - 1
    nonempty slots are the quantities entering the Binet-Minc expansion.
    """

    m: int
    n: int = 0
    s: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be at least 1")
        if self.s is None:
            s = np.zeros(1 << self.m)
        else:
            s = np.array(self.s, dtype=float)
            if s.shape != (1 << self.m,):
                raise DimensionError(f"expected {1 << self.m} sums, got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    def __getitem__(self, mask: int) -> float:
        return float(self.s[mask])

    @property
    def nonempty(self) -> np.ndarray:
        return self.s[1:]

    def of(self, rows: Sequence[int]) -> float:
        """Sum for the subset given as 0-based row indices."""
        return self[rows_to_mask(rows, self.m)]


def rows_to_mask(rows, m: int) -> int:
    mask = 0
    for r in rows:
        r = int(r)
        if not 0 <= r < m:
            raise DomainError(f"row index {r} out of range for m={m}")
        mask |= 1 << r
    return mask


def subset_sums_extend(S: SubsetSums, columns) -> SubsetSums:
    """Absorb a block of columns, given as an (m, k) array.

    Columns are added strictly in order, one at a time, so the result is
    bitwise identical to folding :func:`subset_sums_append` over them.
    """
    cols = np.asarray(columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[0] != S.m:
        raise DimensionError(f"columns have {cols.shape[0]} rows, state has m={S.m}")
    k = cols.shape[1]
    if k == 0:
        return S
    if not np.all(np.isfinite(cols)):
        raise InputError("column entries must be finite")
    width = 1 << S.m
    step = max(1, (1 << 21) // width)
    acc = np.array(S.s)
    ct = cols.T
    for start in range(0, k, step):
        P = _column_products(ct[start : start + step])
        P[0] += acc
        acc = np.add.accumulate(P, axis=0)[-1]
    return SubsetSums(S.m, S.n + k, acc)


def subset_sums_append(S: SubsetSums, column) -> SubsetSums:
    col = np.asarray(column, dtype=float)
    if col.shape != (S.m,):
        raise DimensionError(f"column must have length {S.m}, got shape {col.shape}")
    return subset_sums_extend(S, col[:, None])


def subset_sums(a) -> SubsetSums:
    A = as_matrix(a)
    return subset_sums_extend(SubsetSums(A.m), A.entries)


# --------------------------------------------------------------------------
# set partitions


@dataclass(frozen=True)
class SetPartition:
    """Partition of {0, ..., m-1} encoded as a restricted growth string.

    ``rgs[k]`` is the block label of element k; labels appear in order of
    first use, so ``rgs[0] == 0`` and each entry is at most one more than
    the running maximum.
    """

    rgs: tuple

    def __post_init__(self):
        rgs = tuple(int(v) for v in self.rgs)
        top = -1
        for v in rgs:
            if v < 0 or v > top + 1:
                raise DomainError(f"not a restricted growth string: {rgs}")
            top = max(top, v)
        object.__setattr__(self, "rgs", rgs)

    @property
    def m(self) -> int:
        return len(self.rgs)

    def __len__(self):
        return max(self.rgs) + 1 if self.rgs else 0

    @property
    def blocks(self) -> tuple:
        out = [[] for _ in range(len(self))]
        for i, b in enumerate(self.rgs):
            out[b].append(i)
        return tuple(tuple(b) for b in out)

    @property
    def masks(self) -> tuple:
        return tuple(sum(1 << i for i in b) for b in self.blocks)


def _check_partition_m(m: int, caps: Caps) -> None:
    if m < 1:
        raise DomainError("m must be at least 1")
    if m > caps.partition_m:
        raise CapExceededError("partition_m", caps.partition_m, m)


def enumerate_partitions(m: int, caps: Caps | None = None) -> Iterator[SetPartition]:
    """All set partitions of m elements in lexicographic RGS order."""
    _check_partition_m(m, caps or DEFAULT_CAPS)
    a = [0] * m
    while True:
        yield SetPartition(tuple(a))
        # prefix maxima: bound[k] = 1 + max(a[:k])
        bound = [0] * m
        top = -1
        for k in range(m):
            bound[k] = top + 1
            top = max(top, a[k])
        k = m - 1
        while k > 0 and a[k] >= bound[k]:
            k -= 1
        if k == 0:
            return
        a[k] += 1
        for j in range(k + 1, m):
            a[j] = 0


@lru_cache(maxsize=None)
def bell_number(m: int) -> int:
    """Bell numbers via the Bell triangle."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@lru_cache(maxsize=4)
def partition_table(m: int):
    """Block masks of every partition of m elements, in RGS order.

    Returns ``(masks, nblocks)``: ``masks`` is a (Bell(m), m) integer array
    whose row lists the block masks of one partition padded with zeros;
    ``nblocks`` counts the nonzero entries per row.
    """
    rgs = np.zeros((1, 1), dtype=np.uint8)
    top = np.zeros(1, dtype=np.int64)
    for _ in range(1, m):
        counts = top + 2
        parent = np.repeat(np.arange(len(rgs)), counts)
        offsets = np.repeat(np.cumsum(counts) - counts, counts)
        last = np.arange(len(parent)) - offsets
        rgs = np.hstack([rgs[parent], last[:, None].astype(np.uint8)])
        top = np.maximum(top[parent], last)
    count = len(rgs)
    masks = np.zeros((count, m), dtype=np.int64)
    rows = np.arange(count)
    for i in range(m):
        masks[rows, rgs[:, i]] |= 1 << i
    nblocks = (top + 1).astype(np.int64)
    masks.setflags(write=False)
    nblocks.setflags(write=False)
    return masks, nblocks


def _partition_terms(coef: np.ndarray, m: int, chunk: int = 1 << 16) -> np.ndarray:
    """Signed product of ``coef[block]`` over the blocks of each partition.

    ``coef[0]`` must be 1; it fills the padding slots.
    """
    masks, nblocks = partition_table(m)
    sign = np.where((m - nblocks) % 2 == 0, 1.0, -1.0)
    out = np.empty(len(masks))
    for start in range(0, len(masks), chunk):
        sl = slice(start, start + chunk)
        out[sl] = sign[sl] * coef[masks[sl]].prod(axis=1)
    return out


def _binet_minc_coefficients(sums: np.ndarray, m: int) -> np.ndarray:
    fact = np.array(FACTORIALS)
    coef = fact[_popcounts(m) - 1] * sums
    coef[0] = 1.0
    return coef


def binet_minc_terms(S: SubsetSums, caps: Caps | None = None) -> np.ndarray:
    """One signed term per partition, in RGS order."""
    _check_partition_m(S.m, caps or DEFAULT_CAPS)
    return _partition_terms(_binet_minc_coefficients(np.array(S.s), S.m), S.m)


def binet_minc_magnitude(S: SubsetSums, caps: Caps | None = None) -> float:
    """Sum of absolute partition terms; the scale for cancellation-aware
    comparisons of permanent values."""
    return math.fsum(np.abs(binet_minc_terms(S, caps)))


def permanent_binet_minc(S, caps: Caps | None = None) -> float:
    """Permanent from subset sums via the partition expansion.

    Accepts a :class:`SubsetSums` or anything :func:`as_matrix` takes.
    """
    if not isinstance(S, SubsetSums):
        S = subset_sums(S)
    return math.fsum(binet_minc_terms(S, caps))


def permanent_binet_minc_normalized(S: SubsetSums, caps: Caps | None = None) -> float:
    """per(A) / n^m, evaluated from s_I / n^|I| so nothing grows with n.

    Multiply by ``n**m / falling_power(n, m)`` to get per(A) / n^(falling m).
    """
    if S.n == 0:
        raise DomainError("normalized permanent needs at least one column")
    _check_partition_m(S.m, caps or DEFAULT_CAPS)
    scaled = np.array(S.s) / float(S.n) ** _popcounts(S.m)
    coef = _binet_minc_coefficients(scaled, S.m)
    return math.fsum(_partition_terms(coef, S.m))


# --------------------------------------------------------------------------
# Ryser


def revolving_door(n: int, k: int):
    """Yield all k-subsets of {0..n-1} as bitmasks, consecutive ones
    differing by swapping a single element (Knuth's Algorithm R)."""
    if k < 0 or k > n:
        return
    if k == 0 or k == n:
        yield (1 << k) - 1
        return
    if k == 1:
        for i in range(n):
            yield 1 << i
        return
    # c[1..k] ascending, c[k+1] = n is a sentinel; c[0] is unused
    c = [0] + list(range(k)) + [n]
    mask = (1 << k) - 1
    while True:
        yield mask
        j = 0
        if k % 2:
            if c[1] + 1 < c[2]:
                mask ^= (1 << c[1]) | (1 << (c[1] + 1))
                c[1] += 1
                continue
            j, step = 2, "dec"
        else:
            if c[1] > 0:
                mask ^= (1 << c[1]) | (1 << (c[1] - 1))
                c[1] -= 1
                continue
            j, step = 2, "inc"
        while j <= k:
            if step == "dec":
                if c[j] >= j:
                    mask ^= (1 << c[j]) | (1 << (j - 2))
                    c[j], c[j - 1] = c[j - 1], j - 2
                    break
                j += 1
                step = "inc"
            else:
                if c[j] + 1 < c[j + 1]:
                    mask ^= (1 << c[j - 1]) | (1 << (c[j] + 1))
                    c[j - 1], c[j] = c[j], c[j] + 1
                    break
                j += 1
                step = "dec"
        else:
            return


def _ryser_subset_count(n: int, m: int) -> int:
    return sum(math.comb(n, k) for k in range(1, m + 1))


def permanent_ryser_oblong(a, caps: Caps | None = None, refresh: int = 256) -> float:
    """Permanent by inclusion-exclusion over column subsets.

    per(A) = sum_{r=0}^{m-1} (-1)^r C(n-m+r, r) sigma_{m-r}, where sigma_k
    sums, over all k-column subsets S, the product of the row sums
    restricted to S. Row sums are updated incrementally along the
    revolving-door order and recomputed from scratch every ``refresh``
    subsets to bound drift.
    """
    caps = caps or DEFAULT_CAPS
    A = as_matrix(a)
    m, n = A.shape
    need = _ryser_subset_count(n, m)
    if need > caps.ryser_subsets:
        raise CapExceededError("ryser_subsets", caps.ryser_subsets, need)
    cols = A.entries.T.tolist()
    rows = range(m)

    def fresh(mask):
        rs = [0.0] * m
        j = 0
        while mask:
            if mask & 1:
                c = cols[j]
                for i in rows:
                    rs[i] += c[i]
            mask >>= 1
            j += 1
        return rs

    sigma = {}
    for k in range(1, m + 1):
        order = revolving_door(n, k)
        prev = next(order)
        rs = fresh(prev)
        prods = [math.prod(rs)]
        for t, cur in enumerate(order, 1):
            if t % refresh == 0:
                rs = fresh(cur)
            else:
                diff = prev ^ cur
                cin = cols[(cur & diff).bit_length() - 1]
                cout = cols[(prev & diff).bit_length() - 1]
                for i in rows:
                    rs[i] = rs[i] - cout[i] + cin[i]
            prods.append(math.prod(rs))
            prev = cur
        sigma[k] = math.fsum(prods)
    return math.fsum(
        (-1) ** r * math.comb(n - m + r, r) * sigma[m - r] for r in range(m)
    )


# --------------------------------------------------------------------------
# dispatch and I/O

ALGORITHMS = ("naive", "binet-minc", "ryser")


def default_algorithm(m: int, n: int) -> str:
    return "binet-minc" if n >= 2 * m else "ryser"


def permanent(a, algorithm: str | None = None, caps: Caps | None = None) -> float:
    A = as_matrix(a)
    algorithm = algorithm or default_algorithm(A.m, A.n)
    if algorithm == "naive":
        return permanent_naive(A, caps)
    if algorithm == "binet-minc":
        return permanent_binet_minc(subset_sums(A), caps)
    if algorithm == "ryser":
        return permanent_ryser_oblong(A, caps)
    raise DomainError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def _parse_row(fields):
    return [float(f) for f in fields]


def parse_matrix_csv(text: str) -> OblongMatrix:
    """Parse comma-separated rows. A leading non-numeric line is taken to be
    a header and skipped."""
    lines = [row for row in csv.reader(io.StringIO(text)) if any(f.strip() for f in row)]
    if not lines:
        raise InputError("empty matrix file")
    try:
        _parse_row(lines[0])
    except ValueError:
        lines = lines[1:]
    try:
        rows = [_parse_row(r) for r in lines]
    except ValueError as exc:
        raise InputError(f"unparsable matrix entry: {exc}") from None
    if not rows:
        raise InputError("matrix file has a header but no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InputError(f"ragged matrix: row lengths {sorted(widths)}")
    return OblongMatrix(np.array(rows))


def read_matrix_csv(path) -> OblongMatrix:
    with open(path, newline="") as fh:
        return parse_matrix_csv(fh.read())


def format_matrix_csv(a) -> str:
    A = as_matrix(a)
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in A.entries)
