import json
import math

import numpy as np
import pytest

from permflow import experiment as ex
from permflow.ergodic_proc import ProcessSpec, materialize
from permflow.errors import DomainError
from permflow.perm_core import falling_power, permanent_naive
from permflow.sym_means import symmetric_mean

IID = ProcessSpec("IID", 3, {"low": 0.0, "high": 2.0}, 42)
IID1 = ProcessSpec("IID", 1, {"low": 0.0, "high": 2.0}, 42)
CONST = ProcessSpec("IID", 3, {"dist": "constant", "value": 1.5}, 1)


# -- schedules ----------------------------------------------------------------


def test_schedule_examples():
    assert ex.checkpoint_schedule(10, 2.0).points == (1, 2, 4, 8, 10)
    assert ex.checkpoint_schedule(5, 10.0).points == (1, 5)


def test_schedule_million():
    s = ex.checkpoint_schedule(10**6, 1.5)
    want = sorted({int(math.floor(1.5**k + 0.5)) for k in range(35)} | {10**6})
    assert list(s.points) == want
    assert len(s) == 35 and s.points[-1] == 10**6


def test_schedule_start_and_include():
    s = ex.checkpoint_schedule(100, 3.0, start=4, include=[50, 1000, 2])
    assert s.points[0] == 4 and 50 in s.points and s.points[-1] == 100
    assert all(b > a for a, b in zip(s.points, s.points[1:]))


@pytest.mark.parametrize("args", [(0, 2.0), (10, 1.0), (10, 0.5), (5, 2.0, 6)])
def test_schedule_errors(args):
    with pytest.raises(DomainError):
        ex.checkpoint_schedule(*args)


# -- records ------------------------------------------------------------------


def test_record_fields():
    r = ex.ConvergenceRecord.make(10, 1.1, 1.0)
    assert r.abs_err == pytest.approx(0.1) and r.rel_err == pytest.approx(0.1)
    z = ex.ConvergenceRecord.make(3, 2e-300, 0.0)
    assert z.rel_err == pytest.approx(2.0)


def _check_records(records):
    ns = [r.n for r in records]
    assert ns == sorted(set(ns))
    for r in records:
        assert r.abs_err >= 0 and r.rel_err >= 0
        assert r.abs_err == abs(r.observed - r.target)


# -- permanent ----------------------------------------------------------------


def test_permanent_constant_is_exact():
    recs = ex.run_permanent_convergence(CONST, ex.checkpoint_schedule(5000, 2.0, start=3))
    assert all(r.observed == pytest.approx(1.5**3, rel=1e-12) for r in recs)
    _check_records(recs)


def test_permanent_constant_exact_two_rows():
    spec = ProcessSpec("IID", 2, {"dist": "constant", "value": 1.5}, 1)
    recs = ex.run_permanent_convergence(spec, ex.checkpoint_schedule(1000, 2.0))
    assert all(r.abs_err == 0.0 for r in recs)


def test_permanent_single_row_is_birkhoff_average():
    recs = ex.run_permanent_convergence(IID1, [1, 10, 100, 1000])
    x = materialize(IID1, 1000)[0]
    for r in recs:
        assert r.observed == pytest.approx(x[: r.n].sum() / r.n, rel=1e-14)


def test_permanent_streaming_matches_naive_batch():
    points = [3, 5, 8, 12, 20]
    for spec in (IID, ProcessSpec("Rotation", 3, {"c": [1.0, 2.0, 0.5]}, 9)):
        recs = ex.run_permanent_convergence(spec, points)
        A = materialize(spec, 20)
        for r in recs:
            want = permanent_naive(A[:, : r.n]) / falling_power(r.n, 3)
            assert r.observed == pytest.approx(want, rel=1e-9)


def test_permanent_skips_points_below_m():
    recs = ex.run_permanent_convergence(IID, [1, 2, 3, 4])
    assert [r.n for r in recs] == [3, 4]


def test_determinism():
    sched = ex.checkpoint_schedule(20000)
    a = ex.run_permanent_convergence(IID, sched)
    b = ex.run_permanent_convergence(IID, sched)
    assert ex.records_to_csv(a) == ex.records_to_csv(b)


# -- subset ratio -------------------------------------------------------------


def test_subset_ratio_singleton_is_birkhoff():
    recs = ex.run_subset_ratio(IID, [1], [10, 1000])
    x = materialize(IID, 1000)[1]
    assert recs[-1].observed == pytest.approx(x.mean(), rel=1e-13)
    assert recs[-1].target == 1.0


def test_subset_ratio_constant_closed_form():
    recs = ex.run_subset_ratio(CONST, [0, 2], ex.checkpoint_schedule(10**5))
    for r in recs:
        assert r.observed == 2.25 / r.n
        assert r.target == 0.0


def test_subset_ratio_needs_rows():
    with pytest.raises(DomainError):
        ex.run_subset_ratio(IID, [], [10])
    with pytest.raises(DomainError):
        ex.run_subset_ratio(IID, [5], [10])


def test_low_mean_degree_one_equals_singleton_ratio():
    sched = ex.checkpoint_schedule(50_000)
    a = ex.run_symmetric_mean_low(IID1, 1, sched)
    b = ex.run_subset_ratio(IID1, [0], sched)
    assert [r.observed for r in a] == [r.observed for r in b]


# -- Aaronson -----------------------------------------------------------------


def test_aaronson_bounded_decays():
    spec = ProcessSpec("IID", 1, {"low": 0.0, "high": 1.0}, 3)
    recs = ex.run_aaronson_ratio(spec, 0.5, ex.checkpoint_schedule(10**4))
    for r in recs:
        assert r.observed <= 1.0 / r.n
    assert recs[-1].observed < recs[0].observed
    assert all(not r.flags for r in recs)


def test_aaronson_flags_violation():
    spec = ProcessSpec("ParetoTail", 1, {"alpha_tail": 0.5}, 3)
    with pytest.warns(RuntimeWarning):
        recs = ex.run_aaronson_ratio(spec, 0.6, [10, 100])
    assert all(r.flags == ("hypothesis-violated",) for r in recs)


def test_aaronson_p_range():
    with pytest.raises(DomainError):
        ex.run_aaronson_ratio(IID1, 1.0, [10])


# -- symmetric means ----------------------------------------------------------


def test_low_mean_constant():
    spec = ProcessSpec("IID", 1, {"dist": "constant", "value": 0.7}, 1)
    recs = ex.run_symmetric_mean_low(spec, 4, ex.checkpoint_schedule(2000))
    assert all(r.observed == pytest.approx(0.7, rel=1e-13) for r in recs)


def test_low_mean_streaming_equals_batch():
    recs = ex.run_symmetric_mean_low(IID1, 3, [3, 50, 1000])
    x = materialize(IID1, 1000)[0]
    for r in recs:
        assert r.observed == pytest.approx(symmetric_mean(x[: r.n], 3), rel=1e-12)


def test_low_mean_rejects_negative():
    spec = ProcessSpec("IID", 1, {"low": -1.0, "high": 1.0}, 1)
    with pytest.raises(DomainError):
        ex.run_symmetric_mean_low(spec, 2, [10])


def test_high_mean_equals_batch():
    spec = ProcessSpec("IID", 1, {"low": 1.0, "high": 3.0}, 5)
    x = materialize(spec, 400)[0]
    for m in (0, 1, 2, 5):
        recs = ex.run_symmetric_mean_high(spec, m, [m + 1, 40, 400])
        for r in recs:
            want = symmetric_mean(x[: r.n], r.n - m)
            assert r.observed == pytest.approx(want, rel=1e-10)


def test_high_mean_constant():
    spec = ProcessSpec("IID", 1, {"dist": "constant", "value": 2.5}, 1)
    recs = ex.run_symmetric_mean_high(spec, 3, ex.checkpoint_schedule(1000))
    assert [r.n for r in recs][:2] == [5, 8]  # schedule 1, 2, 3, 5, 8: needs n > m
    assert all(r.observed == pytest.approx(2.5, rel=1e-13) for r in recs)


def test_high_mean_rejects_nonpositive():
    spec = ProcessSpec("IID", 1, {"dist": "constant", "value": 0.0}, 1)
    with pytest.raises(DomainError):
        ex.run_symmetric_mean_high(spec, 1, [10])


# -- max ratio ----------------------------------------------------------------


def test_max_ratio_bounded():
    spec = ProcessSpec("IID", 1, {"low": 0.0, "high": 4.0}, 2)
    recs = ex.run_max_ratio(spec, ex.checkpoint_schedule(10**5))
    x = materialize(spec, 10**5)[0]
    for r in recs:
        assert r.observed <= 4.0 / r.n
        assert r.observed == np.abs(x[: r.n]).max() / r.n


def test_max_ratio_constant():
    spec = ProcessSpec("IID", 1, {"dist": "constant", "value": 3.0}, 2)
    for r in ex.run_max_ratio(spec, [1, 7, 100]):
        assert r.observed == 3.0 / r.n


# -- aggregation and output ---------------------------------------------------


def test_run_seeds_order_and_parallel_equivalence():
    sched = [10, 100, 1000]
    serial = ex.run_seeds(ex.run_permanent_convergence, IID, sched, n_seeds=3)
    parallel = ex.run_seeds(ex.run_permanent_convergence, IID, sched, n_seeds=3, workers=2)
    assert serial == parallel
    assert serial[0] == ex.run_permanent_convergence(IID, sched)
    assert serial[2] == ex.run_permanent_convergence(IID.with_seed(44), sched)


def test_loglog_slope_exact_power():
    recs = [ex.ConvergenceRecord.make(n, 3.0 / n, 0.0) for n in (10, 100, 1000)]
    assert ex.loglog_slope(recs) == pytest.approx(-1.0, abs=1e-12)


def test_csv_and_json():
    recs = ex.run_permanent_convergence(CONST, [3, 10])
    text = ex.records_to_csv(recs)
    lines = text.splitlines()
    assert lines[0] == "n,observed,target,abs_err,rel_err"
    assert len(lines) == 3 and lines[1].startswith("3,")
    blob = json.loads(ex.records_to_json(recs, {"seed": 1}))
    assert blob["metadata"]["seed"] == 1
    assert [r["n"] for r in blob["records"]] == [3, 10]


def test_run_experiment_dispatch():
    recs, meta = ex.run_experiment("subset-ratio", IID, [10, 20], rows=[0, 1])
    assert len(recs) == 2 and meta["experiment"] == "subset-ratio"
    assert meta["spec"]["kind"] == "IID" and meta["wall_time"] >= 0
    with pytest.raises(DomainError):
        ex.run_experiment("nope", IID, [10])


@pytest.mark.parametrize(
    "fn,spec,args",
    [
        (ex.run_permanent_convergence, IID, ()),
        (ex.run_symmetric_mean_low, IID1, (2,)),
        (ex.run_symmetric_mean_high, ProcessSpec("IID", 1, {"low": 1.0, "high": 3.0}, 42), (1,)),
    ],
    ids=["permanent", "symmean-low", "symmean-high"],
)
def test_error_trend_majority(fn, spec, args):
    sched = ex.checkpoint_schedule(10**5, include=[1000])
    runs = ex.run_seeds(fn, spec, *args, sched, n_seeds=11)
    early = [ex.record_at(r, 1000).rel_err for r in runs]
    assert sum(r[-1].rel_err < e for r, e in zip(runs, early)) >= 9
