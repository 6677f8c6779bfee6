import json

import numpy as np
import pytest

from permflow.cli import main
from permflow.perm_core import format_matrix_csv

IID3 = '{"kind": "IID", "m": 3, "params": {"low": 0, "high": 2}, "seed": 42}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize("algo", ["naive", "binet-minc", "ryser"])
def test_perm_small(tmp_path, capsys, algo):
    f = write(tmp_path, "a.csv", "1,2\n3,4\n")
    code, out, err = run(capsys, "perm", f, "--algo", algo)
    assert code == 0 and out.strip() == "10"
    assert algo in err and " s" in err
    code, out, _ = run(capsys, "perm", write(tmp_path, "b.csv", "5,6,7\n"), "--algo", algo)
    assert out.strip() == "18"


def test_perm_default_and_json(tmp_path, capsys):
    f = write(tmp_path, "a.csv", "a,b\n1,2\n3,4\n")
    code, out, _ = run(capsys, "perm", f, "--format", "json")
    blob = json.loads(out)
    assert code == 0 and blob["permanent"] == 10.0 and blob["algorithm"] == "ryser"


def test_perm_algorithms_agree_on_random_4x8(tmp_path, capsys):
    A = np.random.default_rng(48).uniform(-1, 1, (4, 8))
    f = write(tmp_path, "r.csv", format_matrix_csv(A))
    vals = []
    for algo in ("naive", "binet-minc", "ryser"):
        _, out, _ = run(capsys, "perm", f, "--algo", algo)
        vals.append(float(out))
    scale = max(abs(v) for v in vals)
    assert max(vals) - min(vals) <= 1e-10 * scale


def test_perm_square_equals_oblong_path(tmp_path, capsys):
    A = np.random.default_rng(5).uniform(0, 1, (5, 5))
    f = write(tmp_path, "s.csv", format_matrix_csv(A))
    vals = [float(run(capsys, "perm", f, "--algo", a)[1]) for a in ("naive", "ryser", "binet-minc")]
    assert vals == pytest.approx([vals[0]] * 3, rel=1e-12)


@pytest.mark.parametrize("text", ["1,2\n3\n", "1,x\n", "1\n2\n3\n", ""])
def test_perm_bad_input_exit_2(tmp_path, capsys, text):
    code, _, err = run(capsys, "perm", write(tmp_path, "bad.csv", text))
    assert code == 2 and "error" in err


def test_perm_missing_file(tmp_path, capsys):
    assert run(capsys, "perm", str(tmp_path / "nope.csv"))[0] == 2


def test_perm_cap_exit_3(tmp_path, capsys):
    f = write(tmp_path, "w.csv", format_matrix_csv(np.ones((4, 30))))
    code, _, err = run(capsys, "perm", f, "--algo", "naive", "--cap-naive", "1000")
    assert code == 3 and "naive" in err
    code, _, err = run(capsys, "perm", f, "--algo", "binet-minc", "--cap-m", "3")
    assert code == 3


def test_symmean(tmp_path, capsys):
    f = write(tmp_path, "v.csv", "1,4\n")
    code, out, _ = run(capsys, "symmean", f, "--all")
    assert code == 0 and out.strip() == "2.5, 2"
    assert run(capsys, "symmean", f, "1")[1].strip() == "2.5"
    code, out, _ = run(capsys, "symmean", write(tmp_path, "c.csv", "3,3,3,3\n"), "--all")
    assert out.strip() == "3, 3, 3, 3"


def test_symmean_maclaurin_ok(tmp_path, capsys):
    x = np.random.default_rng(100).uniform(0, 5, 100)
    f = write(tmp_path, "v.csv", ",".join(repr(float(v)) for v in x))
    code, out, _ = run(capsys, "symmean", f, "--check-maclaurin")
    assert code == 0 and out.strip() == "OK"


@pytest.mark.parametrize("args", [("-1,2\n", "1"), ("1,2\n", "3"), ("1,2\n",)])
def test_symmean_errors(tmp_path, capsys, args):
    f = write(tmp_path, "v.csv", args[0])
    assert run(capsys, "symmean", f, *args[1:])[0] == 2


def test_converge_constant_exact(capsys):
    spec = '{"kind": "IID", "m": 3, "params": {"dist": "constant", "value": 1.5}, "seed": 1}'
    code, out, err = run(capsys, "converge", "--spec", spec, "--n-max", "2000")
    assert code == 0 and "final rel_err" in err
    lines = out.splitlines()
    assert lines[0] == "n,observed,target,abs_err,rel_err"
    assert all(line.split(",")[3] == "0.0" for line in lines[1:])


def test_converge_is_byte_deterministic(tmp_path, capsys):
    f = write(tmp_path, "spec.json", IID3)
    a = run(capsys, "converge", "--spec", f, "--n-max", "5000")[1]
    b = run(capsys, "converge", "--spec", f, "--n-max", "5000")[1]
    assert a == b and len(a.splitlines()) > 5


def test_converge_m1_matches_singleton_subset_ratio(capsys):
    spec = '{"kind": "IID", "m": 1, "params": {"low": 0, "high": 2}, "seed": 7}'
    a = run(capsys, "converge", "--spec", spec, "--n-max", "10000")[1]
    b = run(capsys, "converge", "--spec", spec, "--n-max", "10000", "--experiment", "subset-ratio", "--rows", "0")[1]
    assert a == b


def test_converge_seed_precedence(capsys, monkeypatch):
    base = run(capsys, "converge", "--spec", IID3, "--n-max", "300")[1]
    other = run(capsys, "converge", "--spec", IID3, "--n-max", "300", "--seed", "43")[1]
    assert base != other
    monkeypatch.setenv("PERMFLOW_SEED", "43")
    assert run(capsys, "converge", "--spec", IID3, "--n-max", "300")[1] == other
    assert run(capsys, "converge", "--spec", IID3, "--n-max", "300", "--seed", "42")[1] == base


def test_converge_json_and_out(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "converge", "--spec", IID3, "--n-max", "100", "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    blob = json.loads(out.read_text())
    assert blob["metadata"]["seed"] == 42 and blob["records"][-1]["n"] == 100


def test_converge_median_mode(capsys):
    code, out, err = run(capsys, "converge", "--spec", IID3, "--n-max", "1000", "--seeds", "3")
    assert code == 0 and "over 3 seeds" in err


@pytest.mark.parametrize(
    "extra",
    [
        ["--spec", '{"kind": "Nope", "m": 1}'],
        ["--spec", "{broken"],
        ["--spec", "/nonexistent/spec.json"],
        ["--spec", IID3, "--experiment", "subset-ratio"],
        ["--spec", IID3, "--experiment", "aaronson"],
        ["--spec", IID3, "--n-max", "0"],
    ],
)
def test_converge_invalid_exit_2(capsys, extra):
    assert run(capsys, "converge", *extra)[0] == 2


def test_bench_small(capsys):
    code, out, _ = run(capsys, "bench", "--m", "2", "--n", "4", "--reps", "3", "--seed", "1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "algorithm,m,n,median_seconds,value,status"
    rows = [line.split(",") for line in lines[1:]]
    assert {r[0] for r in rows} == {"naive", "binet-minc", "ryser"}
    assert all(r[5] == "ok" and float(r[3]) > 0 for r in rows)
    assert len({round(float(r[4]), 10) for r in rows}) == 1


def test_bench_skips_capped_cells(capsys):
    code, out, _ = run(capsys, "bench", "--m", "8", "--n", "10000", "--reps", "1")
    rows = {line.split(",")[0]: line for line in out.splitlines()[1:]}
    assert code == 0
    assert rows["naive"].endswith(",,,skipped")
    assert rows["binet-minc"].endswith(",ok")


def test_bench_unknown_algorithm(capsys):
    assert run(capsys, "bench", "--algo", "magic")[0] == 2
