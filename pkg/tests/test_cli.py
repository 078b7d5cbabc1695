import json
import math

import pytest
from click.testing import CliRunner

from expsamp.cli import ExperimentConfig, main


@pytest.fixture()
def runner():
    return CliRunner()


# ---------------------------------------------------------------------------
# config round-trip
# ---------------------------------------------------------------------------

def test_experiment_config_roundtrip():
    cfg = ExperimentConfig(
        operator="max_min", phi="bspline:3", psi="fejer:pi:0",
        n_list=[5, 9], interval=(0.5, 3.0), points=[1.0, 2.0],
        test_function="h2", phi_function="power:2", lam=0.5,
        quad_tol=1e-8, output="out.csv", format="csv",
    )
    back = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(n_list=[]).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(interval=(-1.0, 2.0)).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(n_list=[1], interval=(1.0, math.e)).validate()
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"no_such_field": 1})


# ---------------------------------------------------------------------------
# kernel info
# ---------------------------------------------------------------------------

def test_kernel_info_bspline2(runner):
    res = runner.invoke(main, ["kernel", "info", "bspline:2", "--grid-density", "2000"])
    assert res.exit_code == 0, res.output
    assert "theta: 0" in res.output
    assert "support: [e^-1, e]" in res.output


def test_kernel_info_jackson_json(runner):
    res = runner.invoke(main, ["kernel", "info", "jackson:1.05:1", "--json",
                               "--grid-density", "2000"])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["norm_constant"] == pytest.approx(0.1515757, abs=1e-6)
    assert data["support"] == "unbounded"


def test_kernel_info_generic_order(runner):
    res = runner.invoke(main, ["kernel", "info", "bspline:9", "--grid-density", "2000"])
    assert res.exit_code == 0, res.output
    assert "support: [e^-4.5, e^4.5]" in res.output


def test_kernel_info_parse_error(runner):
    res = runner.invoke(main, ["kernel", "info", "gauss:3"])
    assert res.exit_code == 2
    assert "gauss" in res.output


# ---------------------------------------------------------------------------
# op eval
# ---------------------------------------------------------------------------

def test_op_eval(runner):
    res = runner.invoke(main, [
        "op", "eval", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "-n", "3", "--interval", "1:7.389",
        "--function", "h1", "-w", "2.0", "--quad-tol", "1e-9",
    ])
    assert res.exit_code == 0, res.output
    assert "value=" in res.output and "abs_error=" in res.output


def test_op_eval_json(runner):
    res = runner.invoke(main, [
        "op", "eval", "--operator", "max_min", "--phi", "bspline:2",
        "--psi", "bspline:2", "-n", "3", "--interval", "1:3",
        "--function", "h2", "-w", "2.0", "--json",
    ])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["rows"][0]["skipped"] is False
    assert 0.0 <= data["rows"][0]["value"] <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# table / verify
# ---------------------------------------------------------------------------

def _make_table(runner, tmp_path, extra=()):
    out = tmp_path / "table.csv"
    args = [
        "table", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "--n-list", "3,4", "--points", "1.5,2.0",
        "--interval", "1:7.389", "--function", "h1",
        "--quad-tol", "1e-8", "--output", str(out),
    ]
    res = runner.invoke(main, args + list(extra))
    return res, out


def test_table_writes_csv_and_mirror(runner, tmp_path):
    res, out = _make_table(runner, tmp_path)
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert lines[0] == "n,point,abs_error,skipped"
    assert len(lines) == 5
    mirror = json.loads((tmp_path / "table.csv.json").read_text())
    assert mirror["config"]["operator"] == "max_product"
    assert len(mirror["rows"]) == 4


def test_table_deterministic(runner, tmp_path):
    res1, out = _make_table(runner, tmp_path)
    first = out.read_bytes()
    res2, out = _make_table(runner, tmp_path)
    assert first == out.read_bytes()


def test_table_both_operators(runner, tmp_path):
    out = tmp_path / "pair.csv"
    res = runner.invoke(main, [
        "table", "--operator", "both", "--phi", "bspline:2", "--psi", "bspline:2",
        "--n-list", "3,4", "--points", "1.5,2.0", "--interval", "1:7.389",
        "--function", "h1", "--quad-tol", "1e-8", "--output", str(out),
    ])
    assert res.exit_code == 0, res.output
    rows = 0
    for oper in ("max_product", "max_min"):
        rows += len((tmp_path / f"pair_{oper}.csv").read_text().splitlines()) - 1
    assert rows == 8


def test_table_h2_default_interval(runner, tmp_path):
    out = tmp_path / "h2.csv"
    res = runner.invoke(main, [
        "table", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "--n-list", "3,5", "--points", "0.8,1.5",
        "--interval", "0.25:3", "--function", "h2", "--quad-tol", "1e-8",
        "--output", str(out),
    ])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    assert all(line.endswith(",0") for line in lines[1:])  # nothing skipped


def test_table_empty_n_list_usage_error(runner, tmp_path):
    res = runner.invoke(main, [
        "table", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "--n-list", "", "--output", str(tmp_path / "x.csv"),
    ])
    assert res.exit_code == 2


def test_verify_self_is_exact(runner, tmp_path):
    res, out = _make_table(runner, tmp_path)
    res = runner.invoke(main, ["verify", str(out), str(out), "--rel-tol", "0"])
    assert res.exit_code == 0, res.output
    assert "PASS" in res.output


def test_verify_reference_shortcut_self(runner, tmp_path):
    # the bundled reference compared against itself passes at rel_tol 0
    from expsamp import refdata, write_table_csv

    rows = refdata.load_reference("table5", "max_product")
    path = tmp_path / "ref.csv"
    write_table_csv(rows, path)
    res = runner.invoke(main, ["verify", str(path), "table5:max_product",
                               "--rel-tol", "0"])
    assert res.exit_code == 0, res.output
    assert "flagged" in res.output


def test_verify_reproduced_table4_passes_diagnostic_tier(runner, tmp_path):
    # rebuild the smooth-signal table for the bspline:3/fejer pair on the
    # default interval and verify against the bundled reference at 25%
    out = tmp_path / "t4.csv"
    res = runner.invoke(main, [
        "table", "--operator", "max_product", "--phi", "bspline:3",
        "--psi", "fejer:pi:0", "--n-list", "17,26,35,53",
        "--points", "0.8,1.5,2.0,2.5", "--interval", "0.25:3",
        "--function", "h1", "--quad-tol", "1e-9", "--output", str(out),
    ])
    assert res.exit_code == 0, res.output
    res = runner.invoke(main, ["verify", str(out), "table4:max_product",
                               "--rel-tol", "0.25"])
    assert res.exit_code == 0, res.output
    assert "PASS" in res.output


def test_verify_schema_error(runner, tmp_path):
    res, out = _make_table(runner, tmp_path)
    broken = tmp_path / "broken.csv"
    broken.write_text("n,point,abs_error,skipped\n3,1.5,not_a_number,0\n")
    res = runner.invoke(main, ["verify", str(out), str(broken)])
    assert res.exit_code == 2


def test_verify_mismatch_exits_one(runner, tmp_path):
    res, out = _make_table(runner, tmp_path)
    other = tmp_path / "other.csv"
    text = out.read_text().splitlines()
    rows = [text[0]]
    for line in text[1:]:
        n, p, e, s = line.split(",")
        rows.append(",".join([n, p, str(float(e) * 10 + 1.0), s]))
    other.write_text("\n".join(rows) + "\n")
    res = runner.invoke(main, ["verify", str(other), str(out), "--rel-tol", "0.25"])
    assert res.exit_code == 1
    assert "FAIL" in res.output


# ---------------------------------------------------------------------------
# sweep / modular / props
# ---------------------------------------------------------------------------

def test_sweep_csv(runner, tmp_path):
    out = tmp_path / "sweep.csv"
    res = runner.invoke(main, [
        "sweep", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "--n-list", "3,5", "--interval", "1:7.389",
        "--function", "h1", "--grid-density", "40", "--quad-tol", "1e-8",
        "--output", str(out),
    ])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert lines[0] == "n,sup_error"
    assert len(lines) == 3


def test_modular_cmd(runner, tmp_path):
    out = tmp_path / "mod.csv"
    res = runner.invoke(main, [
        "modular", "--phi-function", "power:2", "--lambda", "1.0",
        "--operator", "max_product", "--phi", "bspline:2", "--psi", "bspline:2",
        "--n-list", "2,3", "--interval", "1:7.389", "--function", "h1",
        "--quad-tol", "1e-8", "--output", str(out),
    ])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert lines[0] == "n,modular_value,lambda"
    assert len(lines) == 3


def test_modular_requires_phi_function(runner, tmp_path):
    res = runner.invoke(main, [
        "modular", "--operator", "max_product", "--output", str(tmp_path / "m.csv"),
    ])
    assert res.exit_code == 2


def test_modular_overflow_names_lambda(runner, tmp_path):
    res = runner.invoke(main, [
        "modular", "--phi-function", "exppower:1", "--lambda", "5000",
        "--operator", "max_product", "--phi", "bspline:2", "--psi", "bspline:2",
        "--n-list", "2,3", "--interval", "1:7.389", "--function", "h1",
        "--output", str(tmp_path / "m.csv"),
    ])
    assert res.exit_code == 1
    assert "lambda=5000" in res.output


def test_props(runner):
    res = runner.invoke(main, ["props", "--seed", "42", "--cases", "500"])
    assert res.exit_code == 0, res.output
    assert "violations=0" in res.output
    assert "FAIL" not in res.output


# ---------------------------------------------------------------------------
# --config overrides flags
# ---------------------------------------------------------------------------

def test_config_file_overrides_flags(runner, tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"n_list": [4], "points": [2.0]}))
    out = tmp_path / "t.csv"
    res = runner.invoke(main, [
        "table", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "--n-list", "3,5", "--points", "1.5",
        "--interval", "1:7.389", "--function", "h1", "--quad-tol", "1e-8",
        "--output", str(out), "--config", str(cfgfile),
    ])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()[1:]
    assert len(lines) == 1
    assert lines[0].startswith("4,2")


def test_custom_function_from_samples(runner, tmp_path):
    samples = tmp_path / "fn.csv"
    rows = ["w,value"] + [f"{w},{0.5}" for w in (0.5, 1.0, 2.0, 4.0, 8.0)]
    samples.write_text("\n".join(rows) + "\n")
    res = runner.invoke(main, [
        "op", "eval", "--operator", "max_product", "--phi", "bspline:2",
        "--psi", "bspline:2", "-n", "3", "--interval", "1:7.389",
        "--function", str(samples), "-w", "2.0", "--json",
    ])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["rows"][0]["value"] == pytest.approx(0.5, abs=1e-9)
