"""
Shared fixtures: tiny datasets, tiny experiment configs and seeded generators
"""

import numpy as np
import pytest

from src.datagen import ShiftConfig, generate_dataset
from src.expcli import ExperimentConfig, run_delta_sweep
from src.seqmodels import ExpertSpec


def tiny_experiment_config(output_dir, **updates) -> ExperimentConfig:
    """Smallest configuration that still exercises every stage of a sweep point"""
    return ExperimentConfig.model_validate({
        "name": "tiny",
        "data": {"d": 2, "l": 3, "T": 6, "n_train": 40, "n_test": 30, "seed": 3},
        "deltas": [0.0, 0.2],
        "seeds": [0],
        "pool": {
            "size": 3, "hidden_low": 2, "hidden_high": 4,
            "train": {"epochs": 2, "batch_size": 16, "learning_rate": 0.01},
        },
        "maes": {
            "n_experts": 2, "context_hidden_dim": 3, "encoding_dim": 3, "attention_dim": 3,
            "train": {"epochs": 2, "batch_size": 16, "learning_rate": 0.01},
        },
        "stacking": {"steps": 25, "learning_rate": 0.05},
        "ablation": {
            "delta": 0.2, "w_imp": [0.0, 0.5], "pretrain_epochs": [0, 2],
            "attention_kinds": ["additive", "dot"], "n_experts": [1, 2], "search_samples": 0,
        },
        "search": {"n_samples": 3, "grid": [2, 3, 4]},
        "n_perm": 200,
        "output_dir": str(output_dir),
        **updates,
    })


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_shift():
    return ShiftConfig(delta=0.1, d=2, l=3, T=6, n_train=40, n_test=20, seed=7)


@pytest.fixture
def tiny_dataset(tiny_shift):
    return generate_dataset(tiny_shift)


@pytest.fixture
def tiny_specs():
    return [ExpertSpec(hidden_dim=3), ExpertSpec(hidden_dim=4)]


@pytest.fixture
def tiny_experiment(tmp_path):
    return tiny_experiment_config(tmp_path / "runs")


@pytest.fixture(scope="module")
def finished_sweep(tmp_path_factory):
    """A completed two-point sweep shared by the tests of one module"""
    config = tiny_experiment_config(tmp_path_factory.mktemp("sweep") / "runs")
    frame, failed = run_delta_sweep(config)
    return config, frame, failed


@pytest.fixture
def make_experiment(tmp_path):
    """Tiny config factory; keyword arguments override top-level fields"""

    def make(subdir: str = "runs", **updates) -> ExperimentConfig:
        return tiny_experiment_config(tmp_path / subdir, **updates)

    return make
