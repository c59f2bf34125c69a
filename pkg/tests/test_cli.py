import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitflow.cli import (CONFIG_SCHEMA, EXIT_HYPOTHESIS, EXIT_OK, EXIT_SCHEMA, ConfigError, RunConfig, csv_text,
                           dump_matrix, main, parse_matrix)

Z = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
S = [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]  # diag(1, -1) anticommutes with the standard J


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def const_config():
    kf = {"S_p": S, "S_q": S, "x_pieces": [Z], "y_pieces": [Z]}
    return {"operator": {"n": 1, "keyframes": [kf]}}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_constant_config_exit_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, const_config()), "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == 0 and rep["result"]["residual"] == 0
    assert read_csv(out / "eigencurves.csv")[0] == ["t", "branch_id", "lambda"]
    assert read_csv(out / "crossings.csv")[0] == ["source", "t_star", "sign", "multiplicity"]
    assert (out / "report.txt").read_text().strip()


def test_non_hermitian_collar_exit_two(tmp_path):
    cfg = const_config()
    cfg["operator"]["keyframes"][0]["S_p"] = [[[1, 0], [1, 0]], [[0, 0], [-1, 0]]]
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(out)]) == EXIT_SCHEMA
    assert "Hermitian" in json.loads((out / "report.json").read_text())["error"]


@pytest.mark.parametrize("bad", [
    {"operator": {"fleet": {}}, "verifier": "nope"},
    {"operator": {}},
    {"operator": {"fleet": {}}, "extra": 1},
    {"operator": {"n": 1, "keyframes": [{"S_p": [[1, 2]], "S_q": S}]}},
])
def test_schema_violations(tmp_path, bad):
    assert main(["run", "--config", write(tmp_path, bad)]) == EXIT_SCHEMA


def test_unreadable_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_SCHEMA


def test_fleet_seed_deterministic(tmp_path):
    cfg = write(tmp_path, {"operator": {"fleet": {"seed": 7}}, "seed": 7, "output": {"t_resolution": 5}})
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d)]) == EXIT_OK
    for f in ("report.json", "eigencurves.csv", "crossings.csv", "report.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_hypothesis_rejection_exit_three(tmp_path):
    cfg = {"operator": {"corollary": {"kind": "kernel_crossing"}}, "verifier": "bunke"}
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(out)]) == EXIT_HYPOTHESIS
    rep = json.loads((out / "report.json").read_text())
    assert "ker S" in rep["error"] and "kernel_dims" in rep["diagnostics"]


def test_corollary_verifier_run(tmp_path):
    cfg = {"operator": {"corollary": {"kind": "kernel", "seed": 0}}, "verifier": "wbound", "wbound": {"turns": 1}}
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert rep["result"]["theorem"] == "wbound" and rep["result"]["residual"] == 0


def test_flag_overrides(tmp_path):
    cfg = write(tmp_path, {"operator": {"corollary": {"kind": "kernel_crossing"}}})
    assert main(["run", "--config", cfg, "--verifier", "bunke", "--seed", "3", "--tol", "1e-5"]) == EXIT_HYPOTHESIS


def test_sweep_empty_grid(tmp_path, capsys):
    assert main(["sweep", "--config", write(tmp_path, const_config()), "--parameter", "r", "--grid", ""]) == EXIT_OK
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 1  # header only


def test_sweep_r_constancy_and_decay(tmp_path):
    cfg = {"operator": {"corollary": {"kind": "invertible", "seed": 0}}, "verifier": "bunke"}
    out = tmp_path / "out"
    grid = "0.25,0.125,0.0625"
    assert main(["sweep", "--config", write(tmp_path, cfg), "--parameter", "r", "--grid", grid,
                 "--out", str(out), "--jobs", "2"]) == EXIT_OK
    header, *rows = read_csv(out / "sweep.csv")
    col = {h: i for i, h in enumerate(header)}
    assert {r[col["dim_cap_t0"]] for r in rows} == {"0"}
    kd = [float(r[col["k_dist"]]) for r in rows]
    assert kd[0] > kd[1] > kd[2] > 0
    assert {r[col["lhs"]] for r in rows} == {rows[0][col["lhs"]]}


def test_sweep_bad_parameter(tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", "--config", write(tmp_path, const_config()), "--parameter", "q", "--grid", "1"])


def test_selftest_subset_and_flip(capsys):
    assert main(["selftest", "--only", "1"]) == EXIT_OK
    assert "[PASS]  1." in capsys.readouterr().out


@settings(max_examples=30)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_matrix_roundtrip(m, seed):
    a = np.random.default_rng(seed).normal(size=(m, m, 2))
    z = a[..., 0] + 1j * a[..., 1]
    assert np.array_equal(parse_matrix(dump_matrix(z)), z)


@settings(max_examples=50)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_17_digits_roundtrip(x):
    text = csv_text(["x"], [[x]])
    assert text.endswith("\n") and float(text.splitlines()[1]) == x


def test_parse_matrix_rejects_ragged():
    with pytest.raises(ConfigError):
        parse_matrix([[1.0, 2.0]])


def test_schema_is_valid_json_schema():
    import jsonschema
    jsonschema.Draft202012Validator.check_schema(CONFIG_SCHEMA)
    assert RunConfig.from_dict({"operator": {"fleet": {}}}).verifier == "splitthm"
