import csv
import io
import json
import math
from pathlib import Path

import pytest

from regenset import cli
from regenset.envelope import ResultEnvelope, render, to_json

GOLDEN = dict(line.split(": ", 1) for line in
              (Path(__file__).parent / "golden" / "csv_headers.txt").read_text().splitlines())

# small but complete invocations of every table command
SMALL = {
    "sample-overshoot": ["--reps", "20"],
    "intersection-cdf": ["--x", "0.5", "1", "2"],
    "sample-intersection": ["--reps", "20"],
    "shift-law": ["--x", "0", "0.5", "1"],
    "phi": ["--beta", "0.3", "0.5"],
    "simulate-eta": ["--resolution", "200", "--trunc", "8"],
    "eta-tail": ["--reps", "10000", "--resolution", "200", "--trunc", "8", "--x", "2", "5"],
    "self-similarity": ["--reps", "500", "--resolution", "200", "--trunc", "8"],
    "stationarity": ["--reps", "500", "--resolution", "200", "--trunc", "8"],
    "interpolation": ["--reps", "300", "--resolution", "200", "--trunc", "8", "--beta", "0.2", "0.8"],
    "simulate-process": ["--n", "50", "--trunc", "8"],
    "limit-experiment": ["--reps", "1000", "--resolution", "200", "--trunc", "8", "--n", "50", "100"],
    "renewal-asymptotics": ["--n", "2000"],
    "dp-oracle": ["--n", "200"],
}


def run_cli(args, capsys):
    code = cli.run(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("command", sorted(SMALL))
def test_csv_header_golden(command, capsys, tmp_path):
    path = tmp_path / "out.csv"
    code, _, err = run_cli([command, *SMALL[command], "--format", "csv", "--out", str(path),
                            "--threads", "1"], capsys)
    assert code == 0, err
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert ",".join(rows[0]) == GOLDEN[command]
    assert len(rows) > 1


def test_golden_covers_every_command():
    assert set(GOLDEN) == set(cli.COLUMNS)
    for k, v in cli.COLUMNS.items():
        assert ",".join(v) == GOLDEN[k]


@pytest.mark.parametrize("command,grid_flag,values", [
    ("intersection-cdf", "--x", ["0.1", "1", "10", "100"]),
    ("phi", "--beta", ["0.2", "0.4", "0.6"]),
    ("dp-oracle", "--x", ["0.5", "1"]),
])
def test_csv_row_count_matches_grid(command, grid_flag, values, capsys):
    code, out, _ = run_cli([command, grid_flag, *values, "--format", "csv"], capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 1 + len(values)


def test_phi_half(capsys):
    code, out, _ = run_cli(["phi", "--beta", "0.5"], capsys)
    env = json.loads(out)
    assert code == 0 and abs(env["rows"][0]["phi"]) <= 1e-8


def test_intersection_cdf_large_x(capsys):
    code, out, _ = run_cli(["intersection-cdf", "--beta1", "0.75", "--beta2", "0.75", "--a", "1",
                            "--x", "1e6", "1e30"], capsys)
    rows = json.loads(out)["rows"]
    # the tail decays like x**-(beta1 + beta2 - 1): still 3.8e-4 short of 1 at x = 1e6
    assert rows[0]["cdf"] == pytest.approx(1 - 3.8138e-4, abs=1e-7)
    assert rows[1]["cdf"] == pytest.approx(1.0, abs=1e-10)


def test_json_roundtrip_config(capsys):
    code, out, _ = run_cli(["intersection-cdf", "--beta1", "0.7", "--beta2", "0.8", "--a", "2.5",
                            "--x", "0.3", "--quad-tol", "1e-11"], capsys)
    env = json.loads(out)
    assert env["command"] == "intersection-cdf"
    assert env["config"] == {"a": 2.5, "beta1": 0.7, "beta2": 0.8, "quad_tol": 1e-11, "x": [0.3]}
    assert env["columns"] == GOLDEN["intersection-cdf"].split(",")
    assert env["wall_clock_s"] >= 0
    args = ["intersection-cdf"]
    for k, v in env["config"].items():
        args += ["--" + k.replace("_", "-"), *map(repr, v if isinstance(v, list) else [v])]
    code2, out2, _ = run_cli(args, capsys)
    assert json.loads(out2)["rows"] == env["rows"]


@pytest.mark.parametrize("args,needle", [
    (["intersection-cdf", "--beta1", "0.3", "--beta2", "0.5"], "non-intersecting"),
    (["sample-intersection", "--beta1", "0.7", "--beta2", "0.3"], "non-intersecting"),
    (["shift-law", "--beta", "0.6", "--ell", "3"], "beta*"),
    (["simulate-eta", "--beta", "0.8", "--trunc", "4"], "ell_trunc"),
    (["simulate-process", "--beta", "0.75", "--trunc", "3"], "ell_trunc"),
    (["eta-tail", "--reps", "10"], "reps"),
    (["phi", "--beta", "1.0"], "beta"),
    (["sample-overshoot", "--x", "-1"], "x"),
])
def test_validation_exit_2_without_output(args, needle, capsys, tmp_path):
    path = tmp_path / "never.json"
    code, out, err = run_cli([*args, "--out", str(path)], capsys)
    assert code == 2
    assert needle in err
    assert not path.exists()


def test_unknown_command_exit_2(capsys):
    assert cli.run(["no-such-command"]) == 2


def test_unwritable_output_exit_1(capsys, tmp_path):
    code, _, err = run_cli(["phi", "--out", str(tmp_path / "missing" / "x.json")], capsys)
    assert code == 1 and "cannot write" in err


def test_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("REGEN_SEED", "77")
    _, a, _ = run_cli(["sample-overshoot", "--reps", "5"], capsys)
    _, b, _ = run_cli(["sample-overshoot", "--reps", "5", "--seed", "77"], capsys)
    _, c, _ = run_cli(["sample-overshoot", "--reps", "5", "--seed", "78"], capsys)
    ja, jb, jc = json.loads(a), json.loads(b), json.loads(c)
    assert ja["seed"] == 77 and ja["rows"] == jb["rows"] != jc["rows"]


def test_bad_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("REGEN_SEED", "abc")
    code, _, err = run_cli(["phi"], capsys)
    assert code == 2 and "REGEN_SEED" in err


def test_rows_independent_of_threads(capsys):
    base = ["self-similarity", "--reps", "3000", "--resolution", "200", "--trunc", "8"]
    _, a, _ = run_cli([*base, "--threads", "1"], capsys)
    _, b, _ = run_cli([*base, "--threads", "3"], capsys)
    ja, jb = json.loads(a), json.loads(b)
    assert ja["rows"] == jb["rows"] and ja["config"] == jb["config"]


def test_empty_rows_give_header_only_csv():
    env = ResultEnvelope("phi", {}, 1, ["beta", "phi"], [], {})
    assert render(env, "csv") == "beta,phi\n"


@pytest.mark.parametrize("x", [0.1, 1 / 3, math.pi * 1e-300, 2.0**-1074, 1e308, 123456789.123])
def test_float_roundtrip(x):
    assert float(to_json(x)) == x


def test_nonfinite_serialization():
    assert to_json([float("nan"), float("inf"), None, True, 3]) == "[null, null, null, true, 3]"
