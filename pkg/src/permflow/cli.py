"""Command-line front end.

Exit codes: 0 success, 1 a requested check failed, 2 bad input, 3 a size
cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import experiment as ex
from .ergodic_proc import ProcessSpec
from .errors import CapExceededError, InputError, NoClosedFormError
from .perm_core import (
    ALGORITHMS,
    Caps,
    binet_minc_magnitude,
    default_algorithm,
    permanent,
    read_matrix_csv,
    subset_sums,
)
from .sym_means import read_vector_csv, symmetric_mean, symmetric_mean_profile

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


def _fmt(x: float) -> str:
    short = format(x, ".15g")
    return short if float(short) == x else repr(float(x))


def _caps(args) -> Caps:
    base = Caps()
    return Caps(
        naive_terms=args.cap_naive if args.cap_naive is not None else base.naive_terms,
        partition_m=args.cap_m if args.cap_m is not None else base.partition_m,
        ryser_subsets=args.cap_ryser if args.cap_ryser is not None else base.ryser_subsets,
    )


def _int_list(text):
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------


def cmd_perm(args) -> int:
    A = read_matrix_csv(args.matrix)
    algo = args.algo or default_algorithm(A.m, A.n)
    t0 = time.perf_counter()
    value = permanent(A, algo, _caps(args))
    dt = time.perf_counter() - t0
    if args.format == "json":
        print(json.dumps({"permanent": value, "algorithm": algo, "m": A.m, "n": A.n, "seconds": dt}))
    else:
        print(_fmt(value))
    print(f"{algo}: {dt:.6f} s", file=sys.stderr)
    return EXIT_OK


def cmd_symmean(args) -> int:
    x = read_vector_csv(args.vector)
    if args.all or args.check_maclaurin:
        prof = symmetric_mean_profile(x)
        if args.all:
            print(", ".join(_fmt(v) for v in prof.values))
        if args.check_maclaurin:
            bad = prof.maclaurin_violations()
            if bad:
                print("VIOLATIONS at k = " + ", ".join(map(str, bad)))
                return EXIT_CHECK
            print("OK")
        return EXIT_OK
    if args.k is None:
        raise InputError("give k or --all")
    print(_fmt(symmetric_mean(x, args.k)))
    return EXIT_OK


def _load_spec(text: str) -> ProcessSpec:
    if text.lstrip().startswith("{"):
        return ProcessSpec.from_json(text)
    try:
        with open(text) as fh:
            return ProcessSpec.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read spec {text!r}: {exc.strerror}") from None


def _resolve_seed(args, spec: ProcessSpec) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PERMFLOW_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"PERMFLOW_SEED is not an integer: {env!r}") from None
    return spec.seed


def _experiment_kwargs(args, caps):
    name = args.experiment
    if name == "subset-ratio":
        if not args.rows:
            raise InputError("subset-ratio needs --rows")
        return {"rows": args.rows}
    if name == "aaronson":
        if args.p is None:
            raise InputError("aaronson needs --p")
        return {"p": args.p}
    if name in ("symmean-low", "symmean-high"):
        if args.degree is None:
            raise InputError(f"{name} needs --degree")
        return {"m": args.degree}
    if name == "permanent":
        return {"caps": caps}
    return {}


def _median_records(runs):
    out = []
    for recs in zip(*runs):
        obs = float(np.median([r.observed for r in recs]))
        out.append(ex.ConvergenceRecord.make(recs[0].n, obs, recs[0].target))
    return out


def cmd_converge(args) -> int:
    spec = _load_spec(args.spec)
    spec = spec.with_seed(_resolve_seed(args, spec))
    start = spec.m if args.experiment == "permanent" else 1
    schedule = ex.checkpoint_schedule(args.n_max, args.factor, start=start, include=args.include or ())
    caps = _caps(args)
    kw = _experiment_kwargs(args, caps)
    if args.seeds > 1:
        runs, metas = [], []
        for k in range(args.seeds):
            recs, meta = ex.run_experiment(args.experiment, spec.with_seed(spec.seed + k), schedule, **dict(kw))
            runs.append(recs)
            metas.append(meta)
        records = _median_records(runs)
        meta = dict(metas[0], seeds=[m["seed"] for m in metas], wall_time=sum(m["wall_time"] for m in metas))
        summary = f"median final rel_err over {args.seeds} seeds: {ex.median_final(runs):.6g}"
    else:
        records, meta = ex.run_experiment(args.experiment, spec, schedule, **kw)
        summary = f"final rel_err: {records[-1].rel_err:.6g}" if records else "no checkpoints"
    text = ex.records_to_json(records, meta) + "\n" if args.format == "json" else ex.records_to_csv(records)
    _write(text, args.out)
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    caps = _caps(args)
    algos = args.algo.split(",") if args.algo else list(ALGORITHMS)
    for a in algos:
        if a not in ALGORITHMS:
            raise InputError(f"unknown algorithm {a!r}")
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    lines = ["algorithm,m,n,median_seconds,value,status"]
    for m in args.m:
        for n in args.n:
            if m < 1 or n < m:
                continue
            A = rng.uniform(0.0, 1.0, (m, n))
            values, rows = {}, {}
            for a in algos:
                try:
                    values[a] = permanent(A, a, caps)
                except CapExceededError:
                    values[a] = None
            done = {a: v for a, v in values.items() if v is not None}
            scale = max([abs(v) for v in done.values()] + [0.0])
            if m <= caps.partition_m:
                scale = max(scale, binet_minc_magnitude(subset_sums(A), caps))
            ok = all(abs(v - w) <= 1e-10 * scale for v in done.values() for w in done.values())
            for a in algos:
                if values[a] is None:
                    rows[a] = f"{a},{m},{n},,,skipped"
                    continue
                times = []
                for _ in range(args.reps):
                    t0 = time.perf_counter()
                    permanent(A, a, caps)
                    times.append(time.perf_counter() - t0)
                status = "ok" if ok else "mismatch"
                rows[a] = f"{a},{m},{n},{float(np.median(times)):.6g},{values[a]!r},{status}"
            lines.extend(rows[a] for a in algos)
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="permflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def caps_flags(sp):
        sp.add_argument("--cap-naive", type=int, help="max injections for the naive algorithm")
        sp.add_argument("--cap-m", type=int, help="max rows for the partition expansion")
        sp.add_argument("--cap-ryser", type=int, help="max column subsets for ryser")

    sp = sub.add_parser("perm", help="permanent of a CSV matrix")
    sp.add_argument("matrix")
    sp.add_argument("--algo", choices=ALGORITHMS)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    caps_flags(sp)
    sp.set_defaults(func=cmd_perm)

    sp = sub.add_parser("symmean", help="symmetric means of a CSV vector")
    sp.add_argument("vector")
    sp.add_argument("k", nargs="?", type=int)
    sp.add_argument("--all", action="store_true", help="print M_1..M_n")
    sp.add_argument("--check-maclaurin", action="store_true")
    sp.set_defaults(func=cmd_symmean)

    sp = sub.add_parser("converge", help="run a convergence experiment")
    sp.add_argument("--spec", required=True, help="spec JSON file or inline JSON object")
    sp.add_argument("--experiment", choices=sorted(ex.EXPERIMENTS), default="permanent")
    sp.add_argument("--n-max", type=int, default=10**5)
    sp.add_argument("--factor", type=float, default=1.5)
    sp.add_argument("--include", type=_int_list, help="extra checkpoints")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--seeds", type=int, default=1, help="seed count for median mode")
    sp.add_argument("--rows", type=_int_list, help="0-based rows for subset-ratio")
    sp.add_argument("--p", type=float, help="exponent for aaronson")
    sp.add_argument("--degree", type=int, help="m for the symmetric-mean experiments")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    caps_flags(sp)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("bench", help="time the permanent algorithms")
    sp.add_argument("--m", type=_int_list, default=[2, 4, 6])
    sp.add_argument("--n", type=_int_list, default=[8, 10])
    sp.add_argument("--algo", help="comma-separated subset of " + ",".join(ALGORITHMS))
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    caps_flags(sp)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, NoClosedFormError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
