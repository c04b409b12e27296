"""Command-line front end and the flat-file export layer behind it."""

import json
import math

import numpy as np
import pytest

from kernelgreeks import (
    AsianConfig,
    ExperimentConfig,
    GbmParams,
    digital_call,
    reference_value,
    run_replications,
    summarize,
)
from kernelgreeks.cli import main
from kernelgreeks.export import (
    KDE_COLUMNS,
    RATE_COLUMNS,
    RAW_COLUMNS,
    SUMMARY_COLUMNS,
    config_mapping,
    format_real,
    parse_config_file,
    sibling_path,
    sidecar_path,
    summary_row,
    write_raw_csv,
    write_summary_csv,
)

PAPER = GbmParams(spot=120.0, rate=0.0, vol=0.2, maturity=1.0)


# -- formatting and schemas -------------------------------------------------------


def test_column_headers_are_pinned():
    assert SUMMARY_COLUMNS == (
        "estimator,payoff,N,h,theta,epsilon,seed,replications,"
        "mean,bias,variance,mse,stderr,reference,reference_source"
    )
    assert RAW_COLUMNS == "replication,estimate,runtime_ms"
    assert RATE_COLUMNS == "N,h,mse,log_n,log_mse"
    assert KDE_COLUMNS == "grid_point,density"


def test_format_real():
    assert format_real(None) == ""
    assert format_real(1.0) == "1"
    assert format_real(0.1) == "0.10000000000000001"
    assert float(format_real(math.pi)) == math.pi
    assert format_real(float("nan")) == "nan"


def test_summary_row_fields():
    cfg = ExperimentConfig(
        model=PAPER,
        payoff=digital_call(120.0),
        estimator_id="lr",
        bandwidth=1.0,
        n_samples=500,
        replications=4,
        seed=11,
    )
    result = run_replications(cfg)
    ref, source = reference_value(cfg)
    summary = summarize(result.estimates, ref, source)
    fields = summary_row(cfg, result, summary).split(",")
    assert len(fields) == len(SUMMARY_COLUMNS.split(","))
    assert fields[0] == "lr"
    assert fields[1] == "digital"
    assert fields[2] == "500"
    assert fields[3] == fields[4] == fields[5] == ""  # no h, theta, epsilon
    assert float(fields[8]) == summary.mean
    assert fields[14] == "closed_form"


def test_summary_row_marks_averaged_state():
    cfg = ExperimentConfig(
        model=PAPER,
        payoff=digital_call(120.0),
        estimator_id="uniform",
        asian=AsianConfig(steps=4),
        bandwidth=4.0,
        n_samples=200,
        replications=2,
        seed=5,
    )
    result = run_replications(cfg)
    summary = summarize(result.estimates, None)
    fields = summary_row(cfg, result, summary).split(",")
    assert fields[1] == "asian_digital"
    assert fields[14] == "none"
    assert fields[9] == "nan"  # bias has no reference to lean on


def test_raw_csv_layout(tmp_path):
    path = write_raw_csv(tmp_path / "r.csv", [1.5, 2.5], [10.0, 20.0])
    lines = path.read_text().splitlines()
    assert lines == [RAW_COLUMNS, "0,1.5,10", "1,2.5,20"]


def test_summary_csv_empty_rows(tmp_path):
    path = write_summary_csv(tmp_path / "s.csv", [])
    assert path.read_text() == SUMMARY_COLUMNS + "\n"


def test_sidecar_and_sibling_paths(tmp_path):
    assert sidecar_path("results.csv").name == "results.config.json"
    assert sidecar_path("results").name == "results.config.json"
    assert sibling_path("results.csv", "raw").name == "results.raw.csv"
    assert sibling_path("results", "kde.lr").name == "results.kde.lr.csv"


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nseed = 99\n\nn=1000  # trailing\nestimator=lr\n")
    assert parse_config_file(path) == {"seed": "99", "n": "1000", "estimator": "lr"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("seed 99\n")
    with pytest.raises(ValueError):
        parse_config_file(bad)


def test_config_mapping_keys():
    cfg = ExperimentConfig(
        model=PAPER,
        payoff=digital_call(120.0),
        estimator_id="uniform",
        bandwidth=4.0,
        n_samples=100,
        replications=2,
        seed=1,
    )
    mapping = config_mapping(cfg)
    assert set(mapping) == {
        "model.spot",
        "model.rate",
        "model.vol",
        "model.maturity",
        "payoff",
        "strike",
        "asian-steps",
        "estimator",
        "kernel",
        "theta",
        "alpha",
        "fd-eps",
        "bandwidth",
        "n",
        "reps",
        "seed",
        "antithetic",
    }
    assert mapping["asian-steps"] == 0
    assert mapping["bandwidth"] == 4.0


# -- CLI commands ----------------------------------------------------------------


def run_cli(*argv):
    return main(list(argv))


def test_estimate_prints_summary(capsys):
    code = run_cli(
        "estimate", "--estimator", "lr", "--n", "2000", "--reps", "5", "--seed", "3"
    )
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert " +/- " in out[0]
    assert out[1].startswith("reference = ") and out[1].endswith("(closed_form)")
    assert len(out) == 2  # no bandwidth line for a non-kernel estimator


def test_estimate_kernel_reports_resolution(capsys):
    code = run_cli(
        "estimate",
        "--estimator",
        "uniform",
        "--bandwidth",
        "4",
        "--n",
        "2000",
        "--reps",
        "5",
    )
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[2] == "h = 4, theta = 0, epsilon = 4"


def test_estimate_writes_outputs(tmp_path, capsys):
    out_csv = tmp_path / "run.csv"
    code = run_cli(
        "estimate",
        "--estimator",
        "uniform",
        "--bandwidth",
        "4",
        "--n",
        "2000",
        "--reps",
        "6",
        "--seed",
        "21",
        "--out",
        str(out_csv),
    )
    assert code == 0
    capsys.readouterr()
    summary_lines = out_csv.read_text().splitlines()
    assert summary_lines[0] == SUMMARY_COLUMNS
    assert len(summary_lines) == 2
    raw_lines = (tmp_path / "run.raw.csv").read_text().splitlines()
    assert raw_lines[0] == RAW_COLUMNS
    assert len(raw_lines) == 7
    sidecar = json.loads((tmp_path / "run.config.json").read_text())
    assert sidecar["command"] == "estimate"
    assert sidecar["seed"] == 21
    assert sidecar["bandwidth"] == 4.0


def test_bandwidth_command_prints_pilot(capsys):
    code = run_cli("bandwidth", "--n", "50000", "--seed", "7")
    assert code == 0
    out = capsys.readouterr().out
    for label in ("m_hat", "Sigma_hat", "E_1", "E_2", "E_3", "sigma_e", "theta_star", "h_star", "predicted_mse"):
        assert f"{label} = " in out
    h_line = [line for line in out.splitlines() if line.startswith("h_star")][0]
    assert float(h_line.split(" = ")[1]) > 0.0


def test_sweep_requires_out():
    with pytest.raises(SystemExit) as exc:
        run_cli("sweep", "--estimator", "lr", "--n", "100,1000,10000")
    assert exc.value.code == 2


def test_sweep_writes_rate_csv(tmp_path, capsys):
    out_csv = tmp_path / "rate.csv"
    code = run_cli(
        "sweep",
        "--estimator",
        "lr",
        "--n",
        "100,1000,10000,100000",
        "--reps",
        "20",
        "--seed",
        "13",
        "--out",
        str(out_csv),
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert printed.startswith("slope = ")
    lines = out_csv.read_text().splitlines()
    assert lines[0] == RATE_COLUMNS
    assert len(lines) == 6
    assert lines[-1].startswith("# slope=") and " r2=" in lines[-1]
    slope = float(lines[-1].split("slope=")[1].split()[0])
    assert -1.4 <= slope <= -0.6
    body = [line.split(",") for line in lines[1:5]]
    assert [row[0] for row in body] == ["100", "1000", "10000", "100000"]
    assert all(row[1] == "" for row in body)  # lr has no bandwidth
    sidecar = json.loads((tmp_path / "rate.config.json").read_text())
    assert sidecar["n"] == "100,1000,10000,100000"


def test_compare_writes_summary_and_kde(tmp_path, capsys):
    out_csv = tmp_path / "cmp.csv"
    code = run_cli(
        "compare",
        "--estimator",
        "uniform,lr",
        "--bandwidth",
        "4",
        "--n",
        "4000",
        "--reps",
        "12",
        "--seed",
        "31",
        "--out",
        str(out_csv),
    )
    assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed[0].startswith("uniform: ") and printed[1].startswith("lr: ")
    lines = out_csv.read_text().splitlines()
    assert lines[0] == SUMMARY_COLUMNS
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "uniform"
    assert lines[2].split(",")[0] == "lr"
    # both rows share the reference column
    assert lines[1].split(",")[13] == lines[2].split(",")[13]
    for est in ("uniform", "lr"):
        kde_lines = (tmp_path / f"cmp.kde.{est}.csv").read_text().splitlines()
        assert kde_lines[0] == KDE_COLUMNS
        assert len(kde_lines) == 258
        grid = np.array([float(line.split(",")[0]) for line in kde_lines[1:]])
        dens = np.array([float(line.split(",")[1]) for line in kde_lines[1:]])
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=2e-2)


def test_compare_skips_kde_for_few_replications(tmp_path, capsys):
    out_csv = tmp_path / "cmp.csv"
    code = run_cli(
        "compare",
        "--estimator",
        "lr",
        "--n",
        "1000",
        "--reps",
        "5",
        "--out",
        str(out_csv),
    )
    assert code == 0
    capsys.readouterr()
    assert out_csv.exists()
    assert not (tmp_path / "cmp.kde.lr.csv").exists()


def test_config_file_merges_and_flags_override(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("estimator=lr\nn=2000\nreps=5\nseed=3\n")
    run_cli("estimate", "--config", str(cfg_file))
    from_file = capsys.readouterr().out
    run_cli("estimate", "--estimator", "lr", "--n", "2000", "--reps", "5", "--seed", "3")
    direct = capsys.readouterr().out
    assert from_file == direct
    run_cli("estimate", "--config", str(cfg_file), "--seed", "4")
    overridden = capsys.readouterr().out
    run_cli("estimate", "--estimator", "lr", "--n", "2000", "--reps", "5", "--seed", "4")
    assert overridden == capsys.readouterr().out
    assert overridden != direct


def test_sidecar_reproduces_run_byte_for_byte(tmp_path, capsys):
    first = tmp_path / "a.csv"
    run_cli(
        "estimate",
        "--estimator",
        "exponential",
        "--theta",
        "0.3",
        "--bandwidth",
        "5",
        "--n",
        "3000",
        "--reps",
        "8",
        "--seed",
        "77",
        "--antithetic",
        "--out",
        str(first),
    )
    capsys.readouterr()
    mapping = json.loads((tmp_path / "a.config.json").read_text())
    cfg_file = tmp_path / "replay.cfg"
    cfg_file.write_text(
        "\n".join(f"{k}={v}" for k, v in mapping.items() if v is not None) + "\n"
    )
    second = tmp_path / "b.csv"
    run_cli("estimate", "--config", str(cfg_file), "--out", str(second))
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()


def test_bad_arguments_exit_with_usage_error():
    for argv in (
        ["estimate", "--estimator", "pathwise"],
        ["estimate", "--bandwidth", "wide"],
        ["estimate", "--n", "10,20"],
        ["estimate", "--payoff", "butterfly"],
        ["estimate", "--estimator", "lr", "--asian-steps", "4"],
    ):
        with pytest.raises(SystemExit) as exc:
            run_cli(*argv)
        assert exc.value.code == 2


def test_domain_errors_report_cleanly(capsys):
    code = run_cli(
        "estimate", "--estimator", "double", "--bandwidth", "4", "--n", "1", "--reps", "1"
    )
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error: replication 0")
