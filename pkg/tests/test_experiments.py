import json

import pytest

from gausspurity import (ExperimentConfig, GaussianParams, QSampleBatch,
                         emit, run_experiment)
from gausspurity.cli import main

SMALL_N_GRID = [300, 1_000, 3_000]


def small_config(experiment, **kw):
    base = dict(experiment=experiment, n_grid=SMALL_N_GRID, trials=5, seed=42,
                resamples=100)
    base.update(kw)
    return ExperimentConfig(**base)


class TestRunners:
    def test_reports_are_reproducible(self):
        for experiment in ("fig_varnx", "fig_trequad"):
            a = run_experiment(small_config(experiment))
            b = run_experiment(small_config(experiment))
            assert a.rows == b.rows
            assert a.columns == b.columns

    def test_seed_changes_rows(self):
        a = run_experiment(small_config("fig_varnx", seed=1))
        b = run_experiment(small_config("fig_varnx", seed=2))
        assert a.rows != b.rows

    def test_varnx_schema_and_accuracy(self):
        report = run_experiment(small_config("fig_varnx", trials=20))
        assert report.columns == ["n", "mu_hat", "err_low", "err_high",
                                  "mu_true", "rel_err", "n_degenerate"]
        assert [row["n"] for row in report.rows] == SMALL_N_GRID
        assert all(row["mu_true"] == pytest.approx(0.5) for row in report.rows)
        rel = [row["rel_err"] for row in report.rows]
        assert rel[0] > rel[-1]          # error shrinks with more data

    def test_varnx_single_trial_has_bootstrap_band(self):
        report = run_experiment(small_config("fig_varnx", trials=1))
        for row in report.rows:
            assert row["err_low"] <= row["mu_hat"] <= row["err_high"]
            assert row["err_high"] > row["err_low"]

    def test_trequad_positive_bias_and_degenerate_column(self):
        config = small_config("fig_trequad", n_grid=[3_000], trials=60)
        report = run_experiment(config)
        row = report.rows[0]
        assert row["n_degenerate"] >= 0
        assert row["bias"] > 0           # phi = 0: overestimates on average

    def test_varr_and_varnth_truth_columns(self):
        varr = run_experiment(ExperimentConfig(
            experiment="fig_varr", r_grid=[0.0, 1.0], trials=2, seed=5))
        assert [row["r"] for row in varr.rows] == [0.0, 1.0]
        assert all(row["mu_true"] == pytest.approx(0.5) for row in varr.rows)

        varnth = run_experiment(ExperimentConfig(
            experiment="fig_varnth", nbar_grid=[0.0, 1.0], trials=2, seed=5))
        assert varnth.rows[0]["mu_true"] == pytest.approx(1.0)
        assert varnth.rows[1]["mu_true"] == pytest.approx(1 / 3)

    def test_ratio_check_closed_form(self):
        report = run_experiment(ExperimentConfig(experiment="ratio_check"))
        row = report.rows[0]
        assert row["ratio"] == pytest.approx(0.537, abs=5e-4)
        assert row["mu_coherent"] == pytest.approx(0.4416493, abs=1e-6)
        assert row["mu_squeezed"] == pytest.approx(0.2371655, abs=1e-6)

    def test_evolution_time_curves(self):
        t_grid = [0.0, 0.5, 1.0, 2.0]
        report = run_experiment(ExperimentConfig(
            experiment="evolution_time", t_grid=t_grid))
        assert report.columns == ["input", "gamma_t", "mu", "r", "phi",
                                  "ode_residual"]
        by_input = {}
        for row in report.rows:
            by_input.setdefault(row["input"], []).append(row)
        assert set(by_input) == {"coherent", "squeezed", "thermal"}
        assert all(len(v) == len(t_grid) for v in by_input.values())
        # coherent input: the optimal curve, monotonically above the others
        for a, b, c in zip(by_input["coherent"], by_input["squeezed"],
                           by_input["thermal"]):
            assert a["mu"] >= b["mu"] - 1e-12
            assert a["mu"] >= c["mu"] - 1e-12
        assert all(row["ode_residual"] < 1e-8 for row in report.rows)

    def test_evolution_r0_sweep_monotone(self):
        report = run_experiment(ExperimentConfig(
            experiment="evolution_r0_sweep", r_grid=[0.0, 0.5, 1.0, 1.5]))
        for n_bath in (0.0, 0.5, 1.0):
            mus = [row["mu"] for row in report.rows if row["N"] == n_bath]
            assert all(a >= b for a, b in zip(mus, mus[1:]))

    def test_bad_configs_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="no_such_experiment")
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="fig_varnx", n_grid=[100, 100])
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="fig_varnx", trials=0)

    def test_config_round_trip(self):
        config = small_config("fig_varnx", state=GaussianParams(nbar=1.0, r=0.5))
        again = ExperimentConfig.from_dict(config.to_dict())
        assert again.to_dict() == config.to_dict()
        assert run_experiment(again).rows == run_experiment(config).rows


class TestEmit:
    def test_csv_round_trip(self, tmp_path):
        report = run_experiment(ExperimentConfig(experiment="ratio_check"))
        path = tmp_path / "ratio.csv"
        emit(report, path, "csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "gamma_t,mu_squeezed,mu_coherent,ratio"
        values = [float(v) for v in lines[1].split(",")]
        assert values[3] == pytest.approx(0.537, abs=5e-4)

    def test_json_report_refed_as_config(self, tmp_path):
        config = small_config("fig_varnx", trials=2,
                              state=GaussianParams(nbar=0.5, r=0.5))
        report = run_experiment(config)
        path = tmp_path / "report.json"
        emit(report, path, "json")
        data = json.loads(path.read_text())
        assert data["rows"] == report.rows
        again = run_experiment(ExperimentConfig.from_dict(data["config"]))
        assert again.rows == report.rows

    def test_unknown_format(self, tmp_path):
        report = run_experiment(ExperimentConfig(experiment="ratio_check"))
        with pytest.raises(ValueError):
            emit(report, tmp_path / "x.yaml", "yaml")

    def test_unwritable_path(self):
        report = run_experiment(ExperimentConfig(experiment="ratio_check"))
        with pytest.raises(OSError):
            emit(report, "/no/such/dir/report.csv", "csv")


class TestCli:
    def test_evolve_ratio(self, tmp_path, capsys):
        out = tmp_path / "ratio.csv"
        assert main(["evolve", "ratio", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].split(",")[-1] == "ratio"
        assert float(lines[1].split(",")[-1]) == pytest.approx(0.537, abs=5e-4)

    def test_figure_with_config_file(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(small_config(
            "fig_varnx", trials=2,
            state=GaussianParams(nbar=0.5, r=0.5)).to_dict()))
        out = tmp_path / "varnx.json"
        rc = main(["figure", "varnx", "--config", str(config_path),
                   "--out", str(out), "--format", "json"])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["experiment"] == "fig_varnx"
        assert len(data["rows"]) == len(SMALL_N_GRID)

        # the emitted report is itself a valid config
        out2 = tmp_path / "again.json"
        rc = main(["figure", "varnx", "--config", str(out),
                   "--out", str(out2), "--format", "json"])
        assert rc == 0
        assert json.loads(out2.read_text())["rows"] == data["rows"]

    def test_sample_then_estimate_q(self, tmp_path, capsys):
        data = tmp_path / "q.csv"
        rc = main(["sample", "--kind", "q", "--n", "20000", "--seed", "3",
                   "--nbar", "0.5", "--r", "1.5", "--out", str(data)])
        assert rc == 0
        assert QSampleBatch.from_csv(data).n == 20000
        rc = main(["estimate", "--method", "q", "--input", str(data)])
        assert rc == 0
        result = json.loads(capsys.readouterr().out)
        assert result["method"] == "q_joint"
        assert result["mu_hat"] == pytest.approx(0.5, rel=0.1)
        assert result["ci_low"] <= result["mu_hat"] <= result["ci_high"]

    def test_sample_then_estimate_homodyne(self, tmp_path, capsys):
        data = tmp_path / "homodyne.csv"
        rc = main(["sample", "--kind", "homodyne", "--n", "5000", "--seed", "4",
                   "--nbar", "1.0", "--out", str(data)])
        assert rc == 0
        rc = main(["estimate", "--method", "three-quadrature",
                   "--input", str(data)])
        assert rc == 0
        result = json.loads(capsys.readouterr().out)
        assert result["method"] == "three_quadrature"
        assert result["mu_hat"] == pytest.approx(1 / 3, rel=0.1)

    def test_estimate_missing_quadrature(self, tmp_path, capsys):
        data = tmp_path / "one_phase.csv"
        rc = main(["sample", "--kind", "homodyne", "--n", "100", "--seed", "5",
                   "--theta", "0.0", "--out", str(data)])
        assert rc == 0
        rc = main(["estimate", "--method", "three-quadrature",
                   "--input", str(data)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert "theta" in err["message"]

    def test_invalid_state_is_json_error(self, tmp_path, capsys):
        rc = main(["sample", "--kind", "q", "--n", "10", "--nbar", "-1",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]

    def test_unwritable_out_is_os_error(self, capsys):
        rc = main(["evolve", "ratio", "--out", "/no/such/dir/out.csv"])
        assert rc == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "OSError"
