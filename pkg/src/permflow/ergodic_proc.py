"""Seeded stationary ergodic processes with known coordinate integrals.

Each process emits columns (f_1(T^j w), ..., f_m(T^j w)) for j = 0, 1, ...
All randomness comes from numpy's PCG64 bit generator seeded with
``ProcessSpec.seed``, so a (spec, seed) pair always yields the same stream. Drawing a
block of k columns consumes the generator exactly as k single draws would,
so block and column-by-column reads are bit-identical.

Kinds and their ``params``:

``IID``
    ``dist``: ``"uniform"`` (``low``, ``high``, scalar or per-coordinate)
    or ``"constant"`` (``value``).
``Rotation``
    f_i(w) = c_i + cos(2 pi (w + beta_i)) along w -> w + alpha mod 1.
    ``alpha`` defaults to the golden-ratio conjugate, ``beta`` to i/m,
    ``c`` to ones.
``DoublingBits``
    Same observables; the orbit of w -> 2w mod 1 is read through a 64-bit
    window sliding along a seeded fair-bit stream.
``MarkovChain``
    ``P``: row-stochastic irreducible transition matrix; ``table``:
    per-state observable values, shape (states, m). Started from the
    stationary law.
``ParetoTail``
    Independent coordinates with P(f > t) = t^(-alpha_tail), t >= 1.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, InvalidSpecError, NoClosedFormError

__all__ = [
    "Kind",
    "ProcessSpec",
    "ProcessState",
    "init",
    "next_column",
    "next_columns",
    "materialize",
    "expected_product",
    "coordinate_integrals",
    "log_integral",
    "stationary_distribution",
    "doubling_bit_stream",
    "window_at",
    "GOLDEN",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TWO_PI = 2.0 * math.pi


class Kind(str, Enum):
    IID = "IID"
    ROTATION = "Rotation"
    DOUBLING_BITS = "DoublingBits"
    MARKOV_CHAIN = "MarkovChain"
    PARETO_TAIL = "ParetoTail"


def _per_coord(value, m, name):
    arr = np.broadcast_to(np.asarray(value, dtype=float), (m,)).copy()
    if not np.all(np.isfinite(arr)):
        raise InvalidSpecError(f"{name} must be finite")
    return arr


def stationary_distribution(P) -> np.ndarray:
    """Stationary row vector of an irreducible stochastic matrix."""
    P = np.asarray(P, dtype=float)
    k = len(P)
    # solve pi (P - I) = 0 with sum(pi) = 1
    A = np.vstack([(P - np.eye(k)).T, np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@dataclass(frozen=True)
class ProcessSpec:
    kind: Kind
    m: int
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise InvalidSpecError(f"unknown process kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise InvalidSpecError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpecError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "params", dict(self.params))
        self._validate()

    def _validate(self):
        p, m = self.params, self.m
        if self.kind is Kind.IID:
            dist = p.get("dist", "uniform")
            if dist == "uniform":
                lo = _per_coord(p.get("low", 0.0), m, "low")
                hi = _per_coord(p.get("high", 1.0), m, "high")
                if np.any(hi < lo):
                    raise InvalidSpecError("uniform needs low <= high")
            elif dist == "constant":
                if "value" not in p:
                    raise InvalidSpecError("constant distribution needs 'value'")
                _per_coord(p["value"], m, "value")
            else:
                raise InvalidSpecError(f"unknown IID distribution {dist!r}")
        elif self.kind in (Kind.ROTATION, Kind.DOUBLING_BITS):
            _per_coord(p.get("c", 1.0), m, "c")
            _per_coord(p.get("beta", 0.0), m, "beta")
            if self.kind is Kind.ROTATION:
                alpha = float(p.get("alpha", GOLDEN))
                if not math.isfinite(alpha):
                    raise InvalidSpecError("alpha must be finite")
        elif self.kind is Kind.MARKOV_CHAIN:
            if "P" not in p or "table" not in p:
                raise InvalidSpecError("MarkovChain needs 'P' and 'table'")
            P = np.asarray(p["P"], dtype=float)
            if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
                raise InvalidSpecError("transition matrix must be square")
            if np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12, rtol=0):
                raise InvalidSpecError("transition matrix must be row-stochastic")
            ncomp, _ = connected_components(P > 0, directed=True, connection="strong")
            if ncomp != 1:
                raise InvalidSpecError("transition matrix must be irreducible")
            table = np.asarray(p["table"], dtype=float)
            if table.ndim == 1 and m == 1:
                table = table[:, None]
            if table.shape != (P.shape[0], m):
                raise InvalidSpecError(
                    f"observable table must have shape ({P.shape[0]}, {m}), got {table.shape}"
                )
        elif self.kind is Kind.PARETO_TAIL:
            a = float(p.get("alpha_tail", 0.0))
            if not a > 0 or not math.isfinite(a):
                raise InvalidSpecError("alpha_tail must be a positive number")

    # -- observable helpers --------------------------------------------------

    @property
    def c(self) -> np.ndarray:
        return _per_coord(self.params.get("c", 1.0), self.m, "c")

    @property
    def beta(self) -> np.ndarray:
        default = np.arange(self.m) / self.m
        return _per_coord(self.params.get("beta", default), self.m, "beta")

    @property
    def alpha(self) -> float:
        return float(self.params.get("alpha", GOLDEN))

    @property
    def transition(self) -> np.ndarray:
        return np.asarray(self.params["P"], dtype=float)

    @property
    def table(self) -> np.ndarray:
        return np.asarray(self.params["table"], dtype=float).reshape(len(self.transition), self.m)

    def with_seed(self, seed: int) -> "ProcessSpec":
        return ProcessSpec(self.kind, self.m, self.params, seed)

    # -- JSON ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "m": self.m, "params": _jsonable(self.params), "seed": self.seed}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        if not isinstance(d, dict):
            raise InvalidSpecError("spec must be a JSON object")
        missing = {"kind", "m"} - set(d)
        if missing:
            raise InvalidSpecError(f"spec is missing {sorted(missing)}")
        extra = set(d) - {"kind", "m", "params", "seed"}
        if extra:
            raise InvalidSpecError(f"unknown spec fields {sorted(extra)}")
        return cls(d["kind"], d["m"], d.get("params", {}), d.get("seed", 0))

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpecError(f"spec is not valid JSON: {exc}") from None
        return cls.from_dict(d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# --------------------------------------------------------------------------
# states


def _observables(spec: ProcessSpec, w: np.ndarray) -> np.ndarray:
    """c_i + cos(2 pi (w + beta_i)), shape (m, len(w))."""
    return spec.c[:, None] + np.cos(TWO_PI * (w[None, :] + spec.beta[:, None]))


class ProcessState:
    """Position along one orbit. Single-threaded; ``j`` counts columns emitted."""

    def __init__(self, spec: ProcessSpec):
        self.spec = spec
        self.rng = np.random.Generator(np.random.PCG64(spec.seed))
        self.j = 0

    def next_columns(self, k: int) -> np.ndarray:
        if k < 0:
            raise DomainError("k must be nonnegative")
        out = self._draw(int(k))
        self.j += int(k)
        return out

    def _draw(self, k):  # pragma: no cover - abstract
        raise NotImplementedError


class _IIDState(ProcessState):
    def _draw(self, k):
        spec, m = self.spec, self.spec.m
        if spec.params.get("dist", "uniform") == "constant":
            return np.repeat(_per_coord(spec.params["value"], m, "value")[:, None], k, axis=1)
        lo = _per_coord(spec.params.get("low", 0.0), m, "low")
        hi = _per_coord(spec.params.get("high", 1.0), m, "high")
        u = self.rng.random((k, m)).T
        return lo[:, None] + (hi - lo)[:, None] * u


class _ParetoState(ProcessState):
    def _draw(self, k):
        a = float(self.spec.params["alpha_tail"])
        u = 1.0 - self.rng.random((k, self.spec.m)).T  # in (0, 1]
        return u ** (-1.0 / a)


class _RotationState(ProcessState):
    def __init__(self, spec):
        super().__init__(spec)
        self.omega = float(self.rng.random())

    def _draw(self, k):
        alpha = self.spec.alpha
        w = np.empty(k)
        om = self.omega
        for t in range(k):
            w[t] = om
            om = (om + alpha) % 1.0
        self.omega = om
        return _observables(self.spec, w)


def _bits_from_words(words: np.ndarray) -> np.ndarray:
    """Most significant bit of each 64-bit word first."""
    be = np.asarray(words, dtype=np.uint64).astype(">u8")
    return np.unpackbits(be.view(np.uint8))


def doubling_bit_stream(seed: int, nbits: int) -> np.ndarray:
    """The first ``nbits`` fair bits that drive a DoublingBits process."""
    rng = np.random.Generator(np.random.PCG64(seed))
    words = rng.bit_generator.random_raw(-(-nbits // 64))
    return _bits_from_words(words)[:nbits]


def window_at(bits: np.ndarray, j: int) -> int:
    """Integer whose binary digits are bits j..j+63 (bit j most significant)."""
    return int(np.packbits(np.asarray(bits[j : j + 64], dtype=np.uint8)).view(">u8")[0])


class _DoublingState(ProcessState):
    """Orbit point j is 0.b_j b_{j+1} ... b_{j+63} in binary."""

    def __init__(self, spec):
        super().__init__(spec)
        self._buf = np.zeros(0, dtype=np.uint8)  # bits from position j onward

    def _ensure(self, nbits):
        short = nbits - len(self._buf)
        if short > 0:
            words = self.rng.bit_generator.random_raw(-(-short // 64))
            self._buf = np.concatenate([self._buf, _bits_from_words(words)])

    def next_windows(self, k: int) -> np.ndarray:
        """Advance k steps, returning the 64-bit windows as uint64."""
        self._ensure(k + 63)
        if k == 0:
            return np.zeros(0, dtype=np.uint64)
        view = np.lib.stride_tricks.sliding_window_view(self._buf[: k + 63], 64)
        windows = np.packbits(view, axis=1).view(">u8").ravel().astype(np.uint64)
        self._buf = self._buf[k:]
        self.j += k
        return windows

    def current_window(self) -> int:
        self._ensure(64)
        return window_at(self._buf, 0)

    def next_columns(self, k: int) -> np.ndarray:
        if k < 0:
            raise DomainError("k must be nonnegative")
        w = self.next_windows(int(k))
        omega = (w >> np.uint64(11)).astype(float) * 2.0**-53
        return _observables(self.spec, omega)


class _MarkovState(ProcessState):
    def __init__(self, spec):
        super().__init__(spec)
        self.pi = stationary_distribution(spec.transition)
        self._cum = np.cumsum(spec.transition, axis=1).tolist()
        self._table = spec.table
        self.state = self._pick(np.cumsum(self.pi).tolist(), self.rng.random())

    @staticmethod
    def _pick(cdf, u):
        return min(bisect.bisect_right(cdf, u), len(cdf) - 1)

    def _draw(self, k):
        u = self.rng.random(k).tolist()
        states = [0] * k
        s = self.state
        cum, pick = self._cum, self._pick
        for t in range(k):
            states[t] = s
            s = pick(cum[s], u[t])
        self.state = s
        return self._table[np.array(states, dtype=np.int64)].T


_STATES = {
    Kind.IID: _IIDState,
    Kind.PARETO_TAIL: _ParetoState,
    Kind.ROTATION: _RotationState,
    Kind.DOUBLING_BITS: _DoublingState,
    Kind.MARKOV_CHAIN: _MarkovState,
}


def init(spec: ProcessSpec) -> ProcessState:
    return _STATES[spec.kind](spec)


def next_column(state: ProcessState) -> np.ndarray:
    return state.next_columns(1)[:, 0]


def next_columns(state: ProcessState, k: int) -> np.ndarray:
    """The next k columns as an (m, k) array."""
    return state.next_columns(k)


def materialize(spec: ProcessSpec, n: int) -> np.ndarray:
    """The m x n matrix of the first n columns from a fresh state."""
    return init(spec).next_columns(n)


# --------------------------------------------------------------------------
# integrals


def coordinate_integrals(spec: ProcessSpec) -> np.ndarray:
    """The space averages of f_1..f_m."""
    p, m = spec.params, spec.m
    if spec.kind is Kind.IID:
        if p.get("dist", "uniform") == "constant":
            return _per_coord(p["value"], m, "value")
        lo = _per_coord(p.get("low", 0.0), m, "low")
        hi = _per_coord(p.get("high", 1.0), m, "high")
        return (lo + hi) / 2.0
    if spec.kind in (Kind.ROTATION, Kind.DOUBLING_BITS):
        return spec.c
    if spec.kind is Kind.MARKOV_CHAIN:
        return stationary_distribution(spec.transition) @ spec.table
    a = float(p["alpha_tail"])
    if a <= 1.0:
        raise NoClosedFormError(f"Pareto tail index {a} <= 1 is not integrable")
    return np.full(m, a / (a - 1.0))


def expected_product(spec: ProcessSpec) -> float:
    return float(np.prod(coordinate_integrals(spec)))


def _log_uniform_mean(a: float, b: float) -> float:
    if a == b:
        return math.log(a)
    return (b * math.log(b) - a * math.log(a)) / (b - a) - 1.0


def log_integral(spec: ProcessSpec, coordinate: int = 0) -> float:
    """Space average of log f_coordinate; f must be strictly positive."""
    i = int(coordinate)
    if not 0 <= i < spec.m:
        raise DomainError(f"coordinate {i} out of range for m={spec.m}")
    p = spec.params
    if spec.kind is Kind.IID:
        if p.get("dist", "uniform") == "constant":
            v = float(_per_coord(p["value"], spec.m, "value")[i])
            if v <= 0:
                raise DomainError("log integral needs a positive observable")
            return math.log(v)
        lo = float(_per_coord(p.get("low", 0.0), spec.m, "low")[i])
        hi = float(_per_coord(p.get("high", 1.0), spec.m, "high")[i])
        if lo <= 0:
            raise DomainError("log integral needs uniform low > 0")
        return _log_uniform_mean(lo, hi)
    if spec.kind in (Kind.ROTATION, Kind.DOUBLING_BITS):
        c, beta = float(spec.c[i]), float(spec.beta[i])
        if c <= 1.0:
            raise DomainError("c + cos(...) is not strictly positive for c <= 1")
        val, _ = integrate.quad(
            lambda w: math.log(c + math.cos(TWO_PI * (w + beta))),
            0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200,
        )
        return val
    if spec.kind is Kind.MARKOV_CHAIN:
        col = spec.table[:, i]
        pi = stationary_distribution(spec.transition)
        if np.any(col[pi > 0] <= 0):
            raise DomainError("log integral needs a positive observable")
        return float(pi @ np.log(np.where(pi > 0, col, 1.0)))
    # log f is exponential with rate alpha_tail
    return 1.0 / float(p["alpha_tail"])
