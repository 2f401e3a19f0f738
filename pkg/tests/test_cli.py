from __future__ import annotations

import csv
import subprocess
import sys

import pytest

from mixme.cli import main

SMALL = """
[run]
n_iterations = 3
batch_size = 16
[env]
n_legs = 3
episode_length = 40
[policy]
hidden_dims = [6]
[grid]
cells_per_dim = 4
[generalisation]
gravity_values = [0.5, 1.0]
dysfunction_values = [0.0, 1.0]
n_evals = 3
[grid_search]
sigma_iso = [0.001, 0.01]
sigma_line = [0.1]
eta = [16]
n_seeds = 2
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL)
    return str(path)


def _run(config, out, *extra):
    return main(["run", "--config", config, "--seed", "7", "--out", str(out), *extra])


class TestRun:
    def test_byte_identical_reruns(self, config, tmp_path, capsys):
        assert _run(config, tmp_path / "a") == 0
        assert _run(config, tmp_path / "b") == 0
        for name in ("metrics.csv", "archive.json", "archive_genomes.npy", "operator_stats.csv", "config.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert "qd_score=" in capsys.readouterr().out

    def test_variant_flag(self, config, tmp_path):
        assert _run(config, tmp_path / "sa", "--variant", "sa") == 0
        assert '"variant": "sa"' in (tmp_path / "sa" / "config.json").read_text()

    def test_unreadable_config(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) != 0
        assert "error" in capsys.readouterr().err

    def test_bad_key(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("[run]\nspeed = 3\n")
        assert main(["run", "--config", str(path), "--out", str(tmp_path)]) != 0
        assert "speed" in capsys.readouterr().err


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fly"])
        assert exc.value.code != 0
        assert "usage:" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--warp", "9"])
        assert exc.value.code != 0
        assert "usage:" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "mixme", "fly"], capture_output=True, text=True)
        assert proc.returncode != 0 and "usage:" in proc.stderr


class TestEvalAdapt:
    def test_neutral_equals_training_max(self, config, tmp_path, capsys):
        _run(config, tmp_path / "r")
        capsys.readouterr()
        out_csv = tmp_path / "adapt.csv"
        code = main(
            ["eval-adapt", "--run", str(tmp_path / "r"), "--gravity-mult", "1.0", "0.5",
             "--dysfunction-leg", "1", "--dysfunction-coef", "1.0", "0.0", "--out", str(out_csv)]
        )
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        training = float(lines[0].split("=")[1])
        with open(out_csv) as fh:
            rows = list(csv.DictReader(fh))
        assert [(r["scenario"], float(r["value"])) for r in rows] == [
            ("gravity", 1.0), ("gravity", 0.5), ("dysfunction", 1.0), ("dysfunction", 0.0)
        ]
        assert float(rows[0]["adapted_best_fitness"]) == training
        assert float(rows[2]["adapted_best_fitness"]) == training

    def test_defaults_sweep_both(self, config, tmp_path, capsys):
        _run(config, tmp_path / "r")
        capsys.readouterr()
        assert main(["eval-adapt", "--run", str(tmp_path / "r")]) == 0
        out = capsys.readouterr().out
        assert out.count("gravity value=") == 2 and out.count("dysfunction value=") == 2

    def test_bad_leg(self, config, tmp_path, capsys):
        _run(config, tmp_path / "r")
        assert main(["eval-adapt", "--run", str(tmp_path / "r"), "--dysfunction-leg", "7", "--dysfunction-coef", "0"]) != 0

    def test_missing_run(self, tmp_path, capsys):
        assert main(["eval-adapt", "--run", str(tmp_path / "none")]) != 0
        assert "error" in capsys.readouterr().err


class TestExportHeatmap:
    def test_run_directory(self, config, tmp_path):
        _run(config, tmp_path / "r")
        assert main(["export-heatmap", "--archive", str(tmp_path / "r"), "--out", str(tmp_path / "h.csv")]) == 0
        lines = (tmp_path / "h.csv").read_text().splitlines()
        assert lines[0].startswith("index_0,index_1,index_2,descriptor_0")
        assert len(lines) > 1

    def test_empty_archive(self, tmp_path):
        from mixme.archive import Archive, GridConfig
        from mixme.persistence import save_archive
        from mixme.policy import MlpSpec

        save_archive(tmp_path / "e.json", Archive(GridConfig((3, 3))), (MlpSpec(2, 1),))
        assert main(["export-heatmap", "--archive", str(tmp_path / "e.json"), "--out", str(tmp_path / "h.csv")]) == 0
        assert (tmp_path / "h.csv").read_text() == "index_0,index_1,descriptor_0,descriptor_1,fitness\n"

    def test_schema_mismatch(self, tmp_path, capsys):
        (tmp_path / "bad.json").write_text('{"format": "something-else"}')
        assert main(["export-heatmap", "--archive", str(tmp_path / "bad.json"), "--out", str(tmp_path / "h.csv")]) != 0
        assert "error" in capsys.readouterr().err


class TestGridSearchAndOracle:
    def test_grid_search(self, config, tmp_path, capsys):
        assert main(["grid-search", "--config", config, "--out", str(tmp_path / "g"), "--iterations", "1"]) == 0
        rows = (tmp_path / "g" / "grid_search.csv").read_text().splitlines()
        assert rows[0] == "sigma_iso,sigma_line,eta,seed,qd_score" and len(rows) == 1 + 2 * 2
        assert len((tmp_path / "g" / "grid_search_means.csv").read_text().splitlines()) == 3
        assert (tmp_path / "g" / "best.json").exists()

    def test_oracle_check(self, capsys):
        assert main(["oracle-check"]) == 0
        assert "passed" in capsys.readouterr().out
