"""Long-run experiments that track ergodic limits along one orbit.

Every run streams columns from a fresh process state, stops at each
checkpoint of a geometric schedule and records the observed quantity next
to its analytic limit. Nothing of size n is kept: the permanent run holds
2^m subset sums, the symmetric-mean runs hold m + 1 scaled coefficients.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .ergodic_proc import (
    Kind,
    ProcessSpec,
    coordinate_integrals,
    expected_product,
    init,
    log_integral,
)
from .errors import DomainError
from .perm_core import (
    DEFAULT_CAPS,
    Caps,
    SubsetSums,
    _check_partition_m,
    falling_power,
    permanent_binet_minc,
    permanent_binet_minc_normalized,
    rows_to_mask,
    subset_sums_extend,
)
from .sym_means import ElementaryAccumulator

__all__ = [
    "ConvergenceRecord",
    "CheckpointSchedule",
    "checkpoint_schedule",
    "run_permanent_convergence",
    "run_subset_ratio",
    "run_aaronson_ratio",
    "run_symmetric_mean_low",
    "run_symmetric_mean_high",
    "run_max_ratio",
    "EXPERIMENTS",
    "run_experiment",
    "run_seeds",
    "median_final",
    "record_at",
    "loglog_slope",
    "records_to_csv",
    "records_to_json",
    "CSV_HEADER",
]

REL_EPS = 1e-300
CHUNK = 1 << 16
CSV_HEADER = ("n", "observed", "target", "abs_err", "rel_err")


@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    observed: float
    target: float
    abs_err: float
    rel_err: float
    flags: tuple = field(default=(), compare=False)

    @classmethod
    def make(cls, n, observed, target, flags=()):
        observed, target = float(observed), float(target)
        err = abs(observed - target)
        return cls(int(n), observed, target, err, err / max(abs(target), REL_EPS), tuple(flags))


@dataclass(frozen=True)
class CheckpointSchedule:
    n_max: int
    factor: float = 1.5
    start: int = 1
    points: tuple = ()

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def checkpoint_schedule(n_max: int, factor: float = 1.5, start: int = 1, include=()) -> CheckpointSchedule:
    """start, start*factor, start*factor^2, ... rounded, plus n_max.

    ``include`` adds extra checkpoints (clipped to [start, n_max]), e.g. a
    fixed reference length that trend comparisons need.
    """
    n_max, start = int(n_max), int(start)
    if n_max < 1 or start < 1:
        raise DomainError("n_max and start must be positive")
    if start > n_max:
        raise DomainError(f"start {start} exceeds n_max {n_max}")
    if not factor > 1:
        raise DomainError("factor must exceed 1")
    pts = set()
    v = float(start)
    while v < n_max:
        pts.add(int(math.floor(v + 0.5)))
        v *= factor
    pts.add(n_max)
    pts.update(int(p) for p in include if start <= int(p) <= n_max)
    pts = tuple(sorted(p for p in pts if start <= p <= n_max))
    return CheckpointSchedule(n_max, float(factor), start, pts)


def _as_schedule(schedule) -> tuple:
    pts = tuple(schedule.points if isinstance(schedule, CheckpointSchedule) else schedule)
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise DomainError("checkpoints must be strictly increasing")
    return pts


def _walk(spec, points, absorb, observe):
    state = init(spec)
    n = 0
    out = []
    for pt in points:
        while n < pt:
            k = min(CHUNK, pt - n)
            absorb(state.next_columns(k))
            n += k
        out.append(observe(n))
    return out


# --------------------------------------------------------------------------
# runs


def run_permanent_convergence(spec: ProcessSpec, schedule, caps: Caps | None = None):
    """per A(n, w) / n^(falling m) against the product of coordinate means."""
    m = spec.m
    _check_partition_m(m, caps or DEFAULT_CAPS)
    target = expected_product(spec)
    points = [p for p in _as_schedule(schedule) if p >= m]
    S = [SubsetSums(m)]

    def absorb(cols):
        S[0] = subset_sums_extend(S[0], cols)

    def observe(n):
        value = permanent_binet_minc(S[0], caps)
        fp = falling_power(n, m)
        if math.isfinite(value) and abs(value) < 1e300 and math.isfinite(fp):
            # exact whenever the sums are, e.g. constant processes
            return ConvergenceRecord.make(n, value / fp, target)
        norm = permanent_binet_minc_normalized(S[0], caps)
        ratio = math.prod(n / (n - k) for k in range(m))
        return ConvergenceRecord.make(n, norm * ratio, target)

    return _walk(spec, points, absorb, observe)


def run_subset_ratio(spec: ProcessSpec, rows, schedule):
    """s_I(n) / n^|I| for the row subset ``rows`` (0-based indices).

    The limit is the coordinate mean when |I| = 1 and 0 otherwise.
    """
    rows = sorted(set(int(r) for r in rows))
    if not rows:
        raise DomainError("row subset must be nonempty")
    mask = rows_to_mask(rows, spec.m)
    size = len(rows)
    target = float(coordinate_integrals(spec)[rows[0]]) if size == 1 else 0.0
    S = [SubsetSums(spec.m)]

    def absorb(cols):
        S[0] = subset_sums_extend(S[0], cols)

    def observe(n):
        return ConvergenceRecord.make(n, S[0][mask] / float(n) ** size, target)

    return _walk(spec, _as_schedule(schedule), absorb, observe)


def run_aaronson_ratio(spec: ProcessSpec, p: float, schedule, coordinate: int = 0):
    """n^(-1/p) times the Birkhoff sum, which tends to 0 when f is in L^p."""
    p = float(p)
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    flags = ()
    if spec.kind is Kind.PARETO_TAIL and p >= float(spec.params["alpha_tail"]):
        flags = ("hypothesis-violated",)
        warnings.warn(
            f"p={p} >= alpha_tail={spec.params['alpha_tail']}: f is not in L^p, "
            "no convergence is claimed",
            RuntimeWarning,
            stacklevel=2,
        )
    total = [0.0]

    def absorb(cols):
        row = cols[coordinate].copy()
        row[0] += total[0]
        total[0] = float(np.add.accumulate(row)[-1])

    def observe(n):
        return ConvergenceRecord.make(n, total[0] / float(n) ** (1.0 / p), 0.0, flags)

    return _walk(spec, _as_schedule(schedule), absorb, observe)


def _require_nonnegative(x):
    if np.any(x < 0):
        raise DomainError("symmetric means need a nonnegative observable")


def run_symmetric_mean_low(spec: ProcessSpec, m: int, schedule, coordinate: int = 0):
    """M_m(f(w), ..., f(T^{n-1} w)) against the mean of f."""
    if m < 1:
        raise DomainError("m must be at least 1")
    target = float(coordinate_integrals(spec)[coordinate])
    acc = ElementaryAccumulator(m)

    def absorb(cols):
        x = cols[coordinate]
        _require_nonnegative(x)
        acc.extend(x)

    def observe(n):
        return ConvergenceRecord.make(n, acc.symmetric_mean(m), target)

    points = [pt for pt in _as_schedule(schedule) if pt >= m]
    return _walk(spec, points, absorb, observe)


def run_symmetric_mean_high(spec: ProcessSpec, m: int, schedule, coordinate: int = 0):
    """M_{n-m}(f(w), ..., f(T^{n-1} w)) against exp of the mean of log f.

    Uses E_{n-m}(x) = E_n(x) E_m(1/x), i.e.

        M_{n-m} = M_n^(n/(n-m)) * M_m(1/f)^(m/(n-m)),

    with M_n the geometric mean, so only a running log-sum and m + 1
    coefficients are kept.
    """
    if m < 0:
        raise DomainError("m must be nonnegative")
    target = math.exp(log_integral(spec, coordinate))
    logsum = [0.0]
    inv = ElementaryAccumulator(m) if m else None

    def absorb(cols):
        x = cols[coordinate]
        if np.any(x <= 0):
            raise DomainError("the high-order symmetric mean needs a positive observable")
        logs = np.log(x)
        logs[0] += logsum[0]
        logsum[0] = float(np.add.accumulate(logs)[-1])
        if inv is not None:
            inv.extend(1.0 / x)

    def observe(n):
        log_value = logsum[0]
        if inv is not None:
            log_value += m * math.log(inv.symmetric_mean(m))
        return ConvergenceRecord.make(n, math.exp(log_value / (n - m)), target)

    points = [pt for pt in _as_schedule(schedule) if pt > m]
    return _walk(spec, points, absorb, observe)


def run_max_ratio(spec: ProcessSpec, schedule, coordinate: int = 0):
    """max_{j<n} |f(T^j w)| / n, which tends to 0 for integrable f."""
    top = [0.0]

    def absorb(cols):
        top[0] = max(top[0], float(np.max(np.abs(cols[coordinate]))))

    def observe(n):
        return ConvergenceRecord.make(n, top[0] / n, 0.0)

    return _walk(spec, _as_schedule(schedule), absorb, observe)


EXPERIMENTS = {
    "permanent": run_permanent_convergence,
    "subset-ratio": run_subset_ratio,
    "aaronson": run_aaronson_ratio,
    "symmean-low": run_symmetric_mean_low,
    "symmean-high": run_symmetric_mean_high,
    "max-ratio": run_max_ratio,
}


def run_experiment(name: str, spec: ProcessSpec, schedule, **kw):
    """Dispatch by name. Returns ``(records, metadata)``."""
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise DomainError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None
    t0 = time.perf_counter()
    if name == "subset-ratio":
        records = fn(spec, kw.pop("rows"), schedule, **kw)
    elif name == "aaronson":
        records = fn(spec, kw.pop("p"), schedule, **kw)
    elif name in ("symmean-low", "symmean-high"):
        records = fn(spec, kw.pop("m"), schedule, **kw)
    else:
        records = fn(spec, schedule, **kw)
    meta = {
        "experiment": name,
        "spec": spec.to_dict(),
        "seed": spec.seed,
        "schedule": list(_as_schedule(schedule)),
        "algorithm": "binet-minc-normalized" if name == "permanent" else "streaming",
        "wall_time": time.perf_counter() - t0,
    }
    return records, meta


# --------------------------------------------------------------------------
# multi-seed aggregation


def _run_one(args):
    fn, spec, a, kw = args
    return fn(spec, *a, **kw)


def run_seeds(fn, spec: ProcessSpec, *args, n_seeds: int = 11, workers: int | None = None, **kw):
    """Run ``fn`` for seeds spec.seed, spec.seed + 1, ... and return the
    record lists in seed order."""
    jobs = [(fn, spec.with_seed(spec.seed + k), args, kw) for k in range(n_seeds)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


def median_final(runs, attr: str = "rel_err") -> float:
    return float(np.median([getattr(r[-1], attr) for r in runs]))


def record_at(records, n: int) -> ConvergenceRecord:
    for r in records:
        if r.n == n:
            return r
    raise KeyError(f"no checkpoint at n={n}")


def loglog_slope(records, n_min: int = 1) -> float:
    """Least-squares slope of log(observed) against log(n)."""
    pts = [(math.log(r.n), math.log(abs(r.observed))) for r in records if r.n >= n_min and r.observed != 0]
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


# --------------------------------------------------------------------------
# serialization


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.n, repr(r.observed), repr(r.target), repr(r.abs_err), repr(r.rel_err)])
    return buf.getvalue()


def records_to_json(records, metadata: dict | None = None) -> str:
    rows = []
    for r in records:
        d = asdict(r)
        d["flags"] = list(r.flags)
        rows.append(d)
    return json.dumps({"metadata": metadata or {}, "records": rows}, indent=2)
