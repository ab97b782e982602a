import json

import numpy as np
import pytest

from mixedreduce import (
    AmputationConfig,
    CsvOptions,
    MixedTable,
    ampute_mcar,
    initial_guess,
    read_csv,
    write_csv,
)
from mixedreduce.cli import main

from helpers import linear_mixed_benchmark, quant_spec


@pytest.fixture()
def benchmark_csv(tmp_path):
    table = linear_mixed_benchmark(0, n=60)
    path = tmp_path / "data.csv"
    write_csv(table, path)
    return path


def run(*argv):
    return main([str(a) for a in argv])


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert run("reduce", "--bogus") == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_subcommand_is_usage_error(self):
        assert run() == 1

    def test_missing_input_file_is_io_error(self, tmp_path, capsys):
        code = run("reduce", "--input", tmp_path / "absent.csv", "--output-dir", tmp_path / "o")
        assert code == 3
        assert "I/O error" in capsys.readouterr().err

    def test_data_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "const.csv"
        path.write_text("a,b\n1,1\n1,2\n1,3\n")
        code = run("reduce", "--input", path, "--output-dir", tmp_path / "o", "--trees", "5")
        assert code == 2
        assert "constant" in capsys.readouterr().err

    def test_help_exits_zero(self):
        assert run("--help") == 0

    def test_version_exits_zero(self):
        assert run("--version") == 0


class TestAmpute:
    def test_outputs_and_report(self, benchmark_csv, tmp_path):
        out = tmp_path / "amp"
        assert run("ampute", "--input", benchmark_csv, "--output-dir", out,
                   "--rate", "0.1", "--seed", "5") == 0
        for name in ("amputed.csv", "introduced_mask.csv", "schema.csv", "report.json"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        assert report["introduced_cells"] == round(0.1 * 60 * 6)
        amputed = read_csv(out / "amputed.csv")
        assert int(amputed.mask.sum()) == report["introduced_cells"]

    def test_deterministic_report_bytes(self, benchmark_csv, tmp_path):
        out1, out2 = tmp_path / "a1", tmp_path / "a2"
        for out in (out1, out2):
            assert run("ampute", "--input", benchmark_csv, "--output-dir", out,
                       "--rate", "0.1", "--seed", "5") == 0
        assert (out1 / "amputed.csv").read_bytes() == (out2 / "amputed.csv").read_bytes()
        assert (out1 / "introduced_mask.csv").read_bytes() == (out2 / "introduced_mask.csv").read_bytes()


class TestImputeCommand:
    def test_fills_all_holes(self, benchmark_csv, tmp_path):
        amp = tmp_path / "amp"
        run("ampute", "--input", benchmark_csv, "--output-dir", amp, "--rate", "0.1")
        out = tmp_path / "imp"
        assert run("impute", "--input", amp / "amputed.csv", "--schema", amp / "schema.csv",
                   "--output-dir", out, "--trees", "10", "--seed", "1") == 0
        imputed = read_csv(out / "imputed.csv")
        assert not imputed.mask.any()
        report = json.loads((out / "report.json").read_text())
        assert report["imputation"]["iterations"] >= 1


class TestReduceCommand:
    def test_happy_path_outputs(self, benchmark_csv, tmp_path):
        out = tmp_path / "red"
        assert run("reduce", "--input", benchmark_csv, "--output-dir", out,
                   "--seed", "7", "--threshold", "0.9", "--rate", "0.1",
                   "--trees", "10") == 0
        for name in ("scores.csv", "imputed.csv", "model.txt", "report.json",
                     "strip.svg", "density.svg"):
            assert (out / name).exists(), name
        report = json.loads((out / "report.json").read_text())
        assert report["cumulative_at_selected"] >= report["threshold"]
        assert report["selected_components"] >= 1
        assert report["elapsed_seconds"] > 0
        assert report["shape"]["rows"] == 60
        scores = (out / "scores.csv").read_text().splitlines()
        assert scores[0].startswith("PC1")
        assert len(scores) == 61

    def test_no_plots_without_holes(self, benchmark_csv, tmp_path):
        out = tmp_path / "red"
        assert run("reduce", "--input", benchmark_csv, "--output-dir", out,
                   "--trees", "5") == 0
        assert not (out / "strip.svg").exists()
        report = json.loads((out / "report.json").read_text())
        assert report["imputation"]["stopped_by"] == "no_missing"

    def test_model_file_has_17_digit_precision(self, benchmark_csv, tmp_path):
        out = tmp_path / "red"
        run("reduce", "--input", benchmark_csv, "--output-dir", out, "--trees", "5")
        lines = (out / "model.txt").read_text().splitlines()
        assert lines[0].startswith("components ")
        sdev_entries = lines[2].split()[1:]
        # 17 significant digits round-trip float64 exactly
        assert all(float(e) == float(repr(float(e))) for e in sdev_entries)
        assert any(len(e.replace(".", "").replace("-", "").lstrip("0")) >= 16
                   for e in sdev_entries)


class TestEvaluateCommand:
    def test_perfect_imputation_scores_zero(self, benchmark_csv, tmp_path):
        amp = tmp_path / "amp"
        run("ampute", "--input", benchmark_csv, "--output-dir", amp, "--rate", "0.1")
        out = tmp_path / "ev"
        assert run("evaluate", "--truth", benchmark_csv, "--imputed", benchmark_csv,
                   "--mask", amp / "introduced_mask.csv", "--output-dir", out) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["nrmse"] == 0.0
        assert metrics["pfc"] == 0.0

    def test_mean_imputation_baseline_near_one(self, tmp_path):
        table = linear_mixed_benchmark(1, n=200)
        amputed, introduced = ampute_mcar(table, AmputationConfig(0.1, seed=1))
        mean_imputed = initial_guess(amputed)
        truth_path = tmp_path / "truth.csv"
        imp_path = tmp_path / "mean.csv"
        write_csv(table, truth_path)
        write_csv(mean_imputed, imp_path)
        mask_path = tmp_path / "mask.csv"
        names = ",".join(s.name for s in table.specs)
        rows = [names] + [",".join(str(int(v)) for v in row) for row in introduced]
        mask_path.write_text("\n".join(rows) + "\n")

        out = tmp_path / "ev"
        assert run("evaluate", "--truth", truth_path, "--imputed", imp_path,
                   "--mask", mask_path, "--output-dir", out) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert 0.85 <= metrics["nrmse"] <= 1.15

    def test_pfc_not_applicable_without_categorical_holes(self, tmp_path):
        t = MixedTable([quant_spec("a"), quant_spec("b")],
                       [[1.0, 2.0, 3.0], [4.0, 5.0, 7.0]])
        truth_path = tmp_path / "t.csv"
        write_csv(t, truth_path)
        mask_path = tmp_path / "m.csv"
        mask_path.write_text("a,b\n1,0\n0,0\n1,0\n")
        out = tmp_path / "ev"
        assert run("evaluate", "--truth", truth_path, "--imputed", truth_path,
                   "--mask", mask_path, "--output-dir", out) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["pfc"] is None
        assert metrics["categorical_holes"] == 0

    def test_schema_mismatch_is_data_error(self, tmp_path):
        (tmp_path / "t.csv").write_text("a\n1\n2\n")
        (tmp_path / "v.csv").write_text("a\nx\ny\n")
        (tmp_path / "m.csv").write_text("a\n1\n0\n")
        code = run("evaluate", "--truth", tmp_path / "t.csv", "--imputed", tmp_path / "v.csv",
                   "--mask", tmp_path / "m.csv", "--output-dir", tmp_path / "ev")
        assert code == 2


class TestPlotCommands:
    @pytest.fixture()
    def imputed_run(self, benchmark_csv, tmp_path):
        amp = tmp_path / "amp"
        run("ampute", "--input", benchmark_csv, "--output-dir", amp, "--rate", "0.1")
        imp = tmp_path / "imp"
        run("impute", "--input", amp / "amputed.csv", "--schema", amp / "schema.csv",
            "--output-dir", imp, "--trees", "5")
        return imp / "imputed.csv", amp / "introduced_mask.csv", amp / "schema.csv"

    def test_plot_strip(self, imputed_run, tmp_path):
        imputed, mask, schema = imputed_run
        out = tmp_path / "strip.svg"
        assert run("plot-strip", "--input", imputed, "--schema", schema,
                   "--mask", mask, "--out", out, "--seed", "2") == 0
        assert out.exists()

    def test_plot_density(self, imputed_run, tmp_path):
        imputed, mask, schema = imputed_run
        out = tmp_path / "density.svg"
        assert run("plot-density", "--input", imputed, "--schema", schema,
                   "--mask", mask, "--out", out) == 0
        assert out.exists()

    def test_plot_density_unknown_variable(self, imputed_run, tmp_path):
        imputed, mask, schema = imputed_run
        code = run("plot-density", "--input", imputed, "--schema", schema,
                   "--mask", mask, "--out", tmp_path / "d.svg", "--var", "nope")
        assert code == 2


class TestThreadsEnvOverride:
    def test_env_var_used(self, benchmark_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("MIXEDREDUCE_THREADS", "2")
        out = tmp_path / "red"
        assert run("reduce", "--input", benchmark_csv, "--output-dir", out,
                   "--trees", "5", "--rate", "0.05") == 0
