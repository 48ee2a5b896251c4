"""
Tests for the command-line entry point: subcommands, overrides and exit codes
"""

import json

import pytest

import setup as setup_script
from src.expcli import read_table, save_config, sweep_point_key
from src.main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main


@pytest.fixture
def config_file(tiny_experiment, tmp_path, monkeypatch):
    for name in ("MAES_OUTPUT_DIR", "MAES_PARALLELISM", "MAES_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return save_config(tiny_experiment, tmp_path / "tiny.json")


class TestExitCodes:
    def test_missing_config(self, tmp_path):
        assert main(["sweep-delta", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"seeds": []}))
        assert main(["sweep-delta", "--config", str(path)]) == EXIT_CONFIG

    def test_invalid_environment(self, config_file, monkeypatch):
        monkeypatch.setenv("MAES_PARALLELISM", "0")
        assert main(["search", "--config", str(config_file)]) == EXIT_CONFIG

    def test_unknown_grid_is_a_usage_error(self, config_file):
        with pytest.raises(SystemExit) as caught:
            main(["ablate", "--config", str(config_file), "--grid", "dropout"])
        assert caught.value.code == 2

    def test_report_without_runs_fails(self, config_file):
        assert main(["report", "--config", str(config_file)]) == EXIT_FAILED


class TestCommands:
    def test_sweep_then_report_and_evaluate(self, config_file, tiny_experiment, capsys):
        assert main(["sweep-delta", "--config", str(config_file), "--delta", "0.2"]) == EXIT_OK
        summary = read_table(tiny_experiment.artifact_path("sweep", "summary.csv"))
        assert set(summary["delta"]) == {0.2}
        assert "Done" in capsys.readouterr().out

        assert main(["report", "--config", str(config_file), "--delta", "0.2"]) == EXIT_OK
        assert main(["evaluate", "--config", str(config_file), "--delta", "0.2"]) == EXIT_OK
        evaluation = json.loads(
            tiny_experiment.artifact_path(sweep_point_key(0.2, 0), "evaluation.json").read_text()
        )
        result = json.loads(tiny_experiment.artifact_path(sweep_point_key(0.2, 0), "result.json").read_text())
        assert evaluation["models"]["maes"]["mean_apr"] == pytest.approx(result["models"]["maes"]["mean_apr"])

    def test_output_dir_flag_beats_environment(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv("MAES_OUTPUT_DIR", str(tmp_path / "from_env"))
        assert main(["search", "--config", str(config_file)]) == EXIT_OK
        assert (tmp_path / "from_env" / "search" / "samples.csv").exists()

        assert main(["search", "--config", str(config_file), "--output-dir", str(tmp_path / "from_flag")]) == EXIT_OK
        assert (tmp_path / "from_flag" / "search" / "samples.csv").exists()

    def test_gen_data(self, config_file, tiny_experiment, capsys):
        assert main(["gen-data", "--config", str(config_file), "--seed", "0"]) == EXIT_OK
        for delta in tiny_experiment.deltas:
            assert tiny_experiment.artifact_path(f"data/delta={delta}/seed=0", "train.jsonl").exists()
        assert "positive ratio" in capsys.readouterr().out

    def test_train(self, config_file, tiny_experiment):
        assert main(["train", "--config", str(config_file), "--delta", "0.0"]) == EXIT_OK
        assert tiny_experiment.artifact_path(sweep_point_key(0.0, 0), "result.json").exists()

    def test_ablate_single_grid(self, config_file, tiny_experiment):
        assert main(["ablate", "--config", str(config_file), "--grid", "n_experts"]) == EXIT_OK
        assert tiny_experiment.artifact_path("ablation", "n_experts.csv").exists()
        assert not tiny_experiment.artifact_path("ablation", "w_imp.csv").exists()


class TestSetupScript:
    def test_env_file_copied_from_example(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / ".env.example").write_text("MAES_PARALLELISM=2\n")
        assert setup_script.create_env_file()
        assert (tmp_path / ".env").read_text() == "MAES_PARALLELISM=2\n"

    def test_existing_env_file_is_kept(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / ".env").write_text("MAES_LOG_LEVEL=DEBUG\n")
        assert setup_script.create_env_file()
        assert (tmp_path / ".env").read_text() == "MAES_LOG_LEVEL=DEBUG\n"

    def test_stops_at_first_failing_step(self, monkeypatch, capsys):
        ran = []

        def step(name, ok):
            return name, lambda: ran.append(name) or ok

        monkeypatch.setattr(setup_script, "STEPS", [step("a", True), step("b", False), step("c", True)])
        setup_script.main()
        assert ran == ["a", "b"]
        assert "stopped at step 2" in capsys.readouterr().out
