"""Experiment drivers, configuration, CLI, and reproducibility."""

import json

import numpy as np
import pytest

from ml2bf.cli import main
from ml2bf.harness import (
    ConfigError,
    ExperimentConfig,
    build_config,
    derive_stream,
    figure_cell,
    load_config_file,
    run_anova_experiment,
    run_bf,
    run_table1,
)


class TestDeriveStream:
    def test_reproducible(self):
        a = derive_stream(42, 7).standard_normal(100)
        b = derive_stream(42, 7).standard_normal(100)
        np.testing.assert_array_equal(a, b)

    def test_distinct_replicates(self):
        a = derive_stream(42, 0).standard_normal(10**4)
        b = derive_stream(42, 1).standard_normal(10**4)
        assert not np.any(a == b)

    def test_tuple_keys(self):
        a = derive_stream(1, (3, 4)).standard_normal(8)
        b = derive_stream(1, (4, 3)).standard_normal(8)
        assert not np.allclose(a, b)


class TestConfig:
    def test_file_parsing(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# comment\nexperiment = table1\nseed = 11\nreplicates = 5\n"
            "methods = ml,lb\nn_grid = 5,10\n",
            encoding="utf-8",
        )
        values = load_config_file(path)
        cfg = build_config("table1", values)
        assert cfg.seed == 11 and cfg.replicates == 5
        assert cfg.methods == ("ml", "lb")
        assert cfg.overrides["n_grid"] == "5,10"

    def test_cli_overrides_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("experiment = table1\nseed = 11\nreplicates = 5\n", encoding="utf-8")
        cfg = build_config("table1", load_config_file(path), replicates=9)
        assert cfg.replicates == 9

    def test_conflicting_experiment(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("experiment = anova\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="conflicts"):
            build_config("table1", load_config_file(path))

    def test_bad_lines_and_values(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("just a line\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="key = value"):
            load_config_file(path)
        with pytest.raises(ConfigError):
            build_config("table1", {"seed": "abc"})
        with pytest.raises(ConfigError):
            ExperimentConfig(experiment="nope", seed=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(experiment="table1", seed=0, replicates=0)


class TestTable1Driver:
    def test_worker_count_invariance(self):
        base = dict(experiment="table1", seed=5, replicates=8)
        rows1 = run_table1(ExperimentConfig(**base, threads=1, overrides={"n_grid": "5,10"}))
        rows2 = run_table1(ExperimentConfig(**base, threads=3, overrides={"n_grid": "5,10"}))
        assert rows1 == rows2

    def test_share_noise_flag(self):
        base = dict(experiment="table1", seed=5, replicates=6)
        default = run_table1(
            ExperimentConfig(**base, overrides={"n_grid": "5,10"})
        )
        shared = run_table1(
            ExperimentConfig(**base, overrides={"n_grid": "5,10", "share_noise_across_n": "true"})
        )
        assert default != shared

    def test_output_files_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            cfg = ExperimentConfig(
                experiment="table1", seed=3, replicates=5, output_dir=str(out),
                overrides={"n_grid": "5"},
            )
            run_table1(cfg)
        assert (out1 / "table1.csv").read_bytes() == (out2 / "table1.csv").read_bytes()
        assert (out1 / "table1.json").read_bytes() == (out2 / "table1.json").read_bytes()

    def test_se_reported(self):
        rows = run_table1(
            ExperimentConfig(experiment="table1", seed=3, replicates=5,
                             overrides={"n_grid": "5"})
        )
        assert all("se" in row and row["se"] >= 0 for row in rows)


class TestEvidenceBatch:
    def test_bic_estimator_is_least_squares(self):
        # Identity shrinkage: the BIC row of the loss studies uses beta_hat.
        from ml2bf.harness import _evidence_batch
        from ml2bf.regression import fit_suffstats

        rng = np.random.default_rng(17)
        from util import random_dataset

        ds = random_dataset(rng, n=30, p=3)
        stats = [fit_suffstats(ds, m) for m in [(), (0,), (0, 1, 2)]]
        for method in ("bic", "aic"):
            _, shrink = _evidence_batch(stats, method, want_shrinkage=True)
            np.testing.assert_array_equal(shrink, np.ones(3))


class TestFigureDriver:
    def test_cell_shapes_and_determinism(self):
        cell = figure_cell("ar1", 5.0, 3, seed=9, replicates=6, methods=("bic", "ml2"))
        assert cell["losses"].shape == (6, 2, 3)
        assert cell["entropy"].shape == (6, 2)
        again = figure_cell("ar1", 5.0, 3, seed=9, replicates=6, methods=("bic", "ml2"))
        np.testing.assert_array_equal(cell["losses"], again["losses"])

    def test_null_cell_losses_small_and_comparable(self):
        cell = figure_cell("orthogonal", 5.0, 0, seed=2, replicates=30,
                           methods=("bic", "ml2", "lb"))
        avg = cell["losses"][:, :, 2].mean(axis=0)  # bma losses
        assert np.all(avg < 5.0)
        assert avg.max() / avg.min() < 2.0


class TestAnovaDriver:
    def test_rows_and_csv(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="anova", seed=1, replicates=10, output_dir=str(tmp_path),
            overrides={"p_grid": "50,100", "tau2": "0.3", "r": "5"},
        )
        rows = run_anova_experiment(cfg)
        assert len(rows) == 2 * 3
        text = (tmp_path / "anova.csv").read_text()
        assert text.splitlines()[0] == "p,method,avg_prob_true,se,replicates,tau2,r"


class TestRunBf:
    def _write_csv(self, tmp_path, rng, signal=True, p=2, n=40):
        x = rng.standard_normal((n, p))
        beta = np.array([2.0] + [0.0] * (p - 1)) if signal else np.zeros(p)
        y = 1.0 + x @ beta + rng.standard_normal(n)
        lines = ["y," + ",".join(f"x{j + 1}" for j in range(p))]
        for i in range(n):
            lines.append(",".join(repr(float(v)) for v in [y[i], *x[i]]))
        path = tmp_path / "data.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_null_hpm_when_no_signal(self, tmp_path):
        rng = np.random.default_rng(3)
        path = self._write_csv(tmp_path, rng, signal=False)
        cfg = ExperimentConfig(experiment="bf", seed=0, methods=("ml2", "lb", "zs"))
        result = run_bf(path, cfg)
        for method in ("ml2", "lb", "zs"):
            assert result["methods"][method]["hpm"] == []

    def test_single_predictor_branch_behavior(self, tmp_path):
        # Low signal: constrained rule coincides with the unit-information
        # g-prior; strong signal: the fitted covariance strictly wins.
        rng = np.random.default_rng(4)
        weak = self._write_csv(tmp_path, rng, signal=False, p=1, n=20)
        cfg = ExperimentConfig(experiment="bf", seed=0, methods=("ml2", "lb"))
        res = run_bf(weak, cfg)
        ml2 = {tuple(m["model"]): m["log_evidence"] for m in res["methods"]["ml2"]["models"]}
        lb = {tuple(m["model"]): m["log_evidence"] for m in res["methods"]["lb"]["models"]}
        assert ml2[(0,)] == pytest.approx(lb[(0,)], abs=1e-12)

        x = np.linspace(-1, 1, 20)
        y = 1.0 + 30.0 * x + 0.3 * np.random.default_rng(5).standard_normal(20)
        strong = tmp_path / "strong.csv"
        strong.write_text(
            "y,x1\n" + "\n".join(f"{repr(float(a))},{repr(float(b))}" for a, b in zip(y, x)) + "\n",
            encoding="utf-8",
        )
        res = run_bf(strong, cfg)
        ml2 = {tuple(m["model"]): m["log_evidence"] for m in res["methods"]["ml2"]["models"]}
        lb = {tuple(m["model"]): m["log_evidence"] for m in res["methods"]["lb"]["models"]}
        assert ml2[(0,)] > lb[(0,)] + 0.1

    def test_json_written(self, tmp_path):
        rng = np.random.default_rng(6)
        path = self._write_csv(tmp_path, rng)
        out = tmp_path / "out"
        cfg = ExperimentConfig(
            experiment="bf", seed=0, methods=("bic",), output_dir=str(out)
        )
        run_bf(path, cfg)
        obj = json.loads((out / "bf_results.json").read_text())
        assert obj["labels"] == ["x1", "x2"]
        probs = [m["prob"] for m in obj["methods"]["bic"]["models"]]
        assert sum(probs) == pytest.approx(1.0, abs=1e-9)


class TestCli:
    def test_table1_smoke(self, tmp_path, capsys):
        code = main([
            "table1", "--seed", "7", "--replicates", "3", "--out", str(tmp_path / "r"),
        ])
        assert code == 0
        assert (tmp_path / "r" / "table1.csv").exists()

    def test_seed_required(self):
        assert main(["table1"]) == 2

    def test_malformed_csv_names_column(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1.0,0.5\n2.0,oops\n", encoding="utf-8")
        code = main(["bf", str(path)])
        assert code == 2
        assert "x1" in capsys.readouterr().err

    def test_unknown_experiment_rejected(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_config_file_workflow(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(
            "experiment = anova\nseed = 4\nreplicates = 5\np_grid = 30\n", encoding="utf-8"
        )
        code = main(["anova", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
        assert code == 0
        sidecar = json.loads((tmp_path / "o" / "anova.json").read_text())
        assert sidecar["seed"] == 4 and sidecar["overrides"]["p_grid"] == "30"

    def test_methods_flag_validation(self, tmp_path):
        code = main(["anova", "--seed", "1", "--replicates", "2", "--methods", "zs"])
        assert code == 2
