"""CLI and experiment-runner tests: flags, config files, CSV contracts."""

import csv

import numpy as np
import pytest

from farrowsync.cli import main, parse_config_file
from farrowsync.errors import ParameterError
from farrowsync.experiments import (
    AGGREGATE_CSV_HEADER,
    TRIAL_CSV_HEADER,
    ExperimentConfig,
    run_custom,
    run_experiment,
)

FAST = dict(trials=3, n_samples=256)


def _read(path):
    with open(path) as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


def test_csv_headers_match_contract(tmp_path):
    s = run_experiment(ExperimentConfig(experiment="ex1", output_path=str(tmp_path), **FAST))
    assert _read(s.trial_csv).splitlines()[0] == TRIAL_CSV_HEADER
    assert _read(s.aggregate_csv).splitlines()[0] == AGGREGATE_CSV_HEADER


def test_determinism_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    cfg = dict(experiment="ex1", trials=1, seed=11)
    run_experiment(ExperimentConfig(output_path=str(a), **cfg))
    run_experiment(ExperimentConfig(output_path=str(b), **cfg))
    assert _read(a / "ex1_trials.csv") == _read(b / "ex1_trials.csv")
    assert _read(a / "ex1_aggregate.csv") == _read(b / "ex1_aggregate.csv")


def test_aggregate_consistent_with_trial_rows(tmp_path):
    cfg = ExperimentConfig(experiment="ex1", trials=5, seed=2, output_path=str(tmp_path))
    s = run_experiment(cfg)
    with open(s.trial_csv) as fh:
        rows = list(csv.DictReader(fh))
    post = np.array([float(r["nmse_post_db"]) for r in rows])
    within1 = np.mean([
        float(r["delta_relerr"]) <= 0.01 and float(r["eps_relerr"]) <= 0.01
        for r in rows
    ])
    agg = s.aggregates[0]
    assert agg["mean_nmse_post_db"] == float(np.mean(post))
    assert agg["median_nmse_post_db"] == float(np.median(post))
    assert agg["frac_within_1pct"] == float(within1)
    # and the aggregate CSV reproduces the in-memory aggregate exactly
    with open(s.aggregate_csv) as fh:
        arow = list(csv.DictReader(fh))[0]
    assert float(arow["mean_nmse_post_db"]) == agg["mean_nmse_post_db"]
    assert float(arow["frac_within_1pct"]) == agg["frac_within_1pct"]


def test_snr_sweep_emits_one_aggregate_row_per_point(tmp_path):
    cfg = ExperimentConfig(experiment="ex4", trials=2, snr_db=[20.0, 40.0],
                           ber_trials=0, output_path=str(tmp_path))
    s = run_experiment(cfg)
    assert [a["sweep_value"] for a in s.aggregates] == [20.0, 40.0]
    assert len(s.records) == 4
    lines = _read(s.aggregate_csv).strip().splitlines()
    assert len(lines) == 3  # header + 2 sweep rows


def test_custom_epsilon_sweep(tmp_path):
    cfg = ExperimentConfig(experiment="custom", signal="multisine", trials=2,
                           epsilon_sweep=[0.01, 0.02, 0.03], snr_db=np.inf,
                           output_path=str(tmp_path))
    s = run_experiment(cfg)
    assert [a["sweep_value"] for a in s.aggregates] == [0.01, 0.02, 0.03]


def test_custom_zero_offsets_near_zero_estimates(tmp_path):
    cfg = ExperimentConfig(experiment="custom", signal="multisine", trials=1,
                           delta_ppm=0.0, epsilon=0.0, snr_db=np.inf,
                           output_path="")
    s = run_custom(cfg)
    r = s.records[0]
    # bounded by the wideband bank's passband ripple at d = 0
    assert abs(r.delta_hat_ppm) * 1e-6 < 1e-6
    assert abs(r.eps_hat) < 2e-4


def test_custom_matches_ex2_first_trial(tmp_path):
    common = dict(trials=1, seed=9, snr_db=60.0, epsilon=0.03)
    s2 = run_experiment(ExperimentConfig(experiment="ex2", output_path="", **common))
    sc = run_custom(ExperimentConfig(signal="bandpass", output_path="", **common))
    assert s2.records[0].csv_row() == sc.records[0].csv_row()


def test_invalid_experiment_raises():
    with pytest.raises(ParameterError):
        run_experiment(ExperimentConfig(experiment="ex9"))
    with pytest.raises(ParameterError):
        run_experiment(ExperimentConfig(trials=0))


def test_epsilon_defaults_per_experiment():
    assert ExperimentConfig(experiment="ex1").resolved_epsilon() == 0.03
    assert ExperimentConfig(experiment="ex5").resolved_epsilon() == 300e-6
    assert ExperimentConfig(experiment="ex4", epsilon=0.1).resolved_epsilon() == 0.1


def test_ofdm_experiment_ber_columns(tmp_path):
    cfg = ExperimentConfig(experiment="ex3", trials=2, ber_trials=1,
                           output_path=str(tmp_path))
    s = run_experiment(cfg)
    assert np.isfinite(s.records[0].ber_pre) and np.isfinite(s.records[0].ber_post)
    assert np.isnan(s.records[1].ber_pre)  # beyond ber_trials
    assert s.records[0].ber_pre > 0.2  # uncorrected CFO scrambles the payload
    assert s.records[0].ber_post == 0.0


def test_constellation_dumps(tmp_path):
    cfg = ExperimentConfig(experiment="ex3", trials=1, ber_trials=1,
                           dump_constellations=True, output_path=str(tmp_path))
    run_experiment(cfg)
    for name in ("constellation_pre.csv", "constellation_post_sfo.csv",
                 "constellation_post_cfo.csv"):
        assert (tmp_path / name).exists()
        assert _read(tmp_path / name).splitlines()[0] == "index,real,imag"


# ---------------------------------------------------------------------------
# CLI front end
# ---------------------------------------------------------------------------


def test_cli_end_to_end(tmp_path, capsys):
    rc = main([
        "--experiment", "ex1", "--trials", "2", "--seed", "5",
        "--out", str(tmp_path),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "ex1" in out and "NMSE" in out
    assert (tmp_path / "ex1_trials.csv").exists()
    assert (tmp_path / "ex1_aggregate.csv").exists()


def test_cli_repeatable_snr_flag(tmp_path):
    rc = main([
        "--experiment", "custom", "--trials", "1", "--out", str(tmp_path),
        "--snr-db", "20", "--snr-db", "40",
    ])
    assert rc == 0
    lines = _read(tmp_path / "custom_aggregate.csv").strip().splitlines()
    assert len(lines) == 3


def test_cli_delta_sweep_flag(tmp_path):
    rc = main([
        "--experiment", "custom", "--trials", "1", "--out", str(tmp_path),
        "--delta-sweep=-100,100",
    ])
    assert rc == 0
    rows = _read(tmp_path / "custom_trials.csv").strip().splitlines()[1:]
    assert len(rows) == 2
    assert float(rows[0].split(",")[1]) == pytest.approx(-100.0, rel=1e-12)
    assert float(rows[1].split(",")[1]) == pytest.approx(100.0, rel=1e-12)


def test_cli_config_file_and_flag_precedence(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# campaign settings\n"
        "experiment = ex1\n"
        "trials = 4\n"
        "seed = 3\n"
        f"out = {tmp_path}/fromfile\n"
    )
    rc = main(["--config", str(cfgfile), "--trials", "2"])
    assert rc == 0
    rows = _read(tmp_path / "fromfile" / "ex1_trials.csv").strip().splitlines()[1:]
    assert len(rows) == 2  # flag wins over the file's trials=4


def test_parse_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this line has no equals sign\n")
    with pytest.raises(ParameterError):
        parse_config_file(str(bad))


def test_parse_config_file_normalizes_keys(tmp_path):
    f = tmp_path / "k.cfg"
    f.write_text("delta-ppm = -100\n\n# comment\nsnr_db=30\n")
    d = parse_config_file(str(f))
    assert d == {"delta_ppm": "-100", "snr_db": "30"}


def test_cli_error_exit_code(capsys):
    rc = main(["--experiment", "custom", "--trials", "1", "--signal", "ofdm",
               "--delta-ppm", "20000", "--out", ""])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_seed_changes_output(tmp_path):
    a = run_experiment(ExperimentConfig(experiment="ex1", trials=1, seed=0, output_path=""))
    b = run_experiment(ExperimentConfig(experiment="ex1", trials=1, seed=1, output_path=""))
    assert a.records[0].delta_hat_ppm != b.records[0].delta_hat_ppm
