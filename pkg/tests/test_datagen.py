"""
Tests for the temporal conditional shift generator and dataset storage
"""

import numpy as np
import pytest
from pydantic import ValidationError

from src.datagen import (
    ShiftConfig,
    compute_scores,
    generate_dataset,
    generate_shift_weights,
    label_threshold,
    load_dataset,
    relabel,
    save_dataset,
)
from src.errors import ConfigurationError, GenerationError

DELTA_GRID = [0.0, 0.01, 0.025, 0.05, 0.075, 0.1, 0.2, 0.3, 0.4]


class TestShiftWeights:
    def test_zero_delta_is_constant(self):
        weights = generate_shift_weights(ShiftConfig(delta=0.0, T=12, seed=4))
        np.testing.assert_array_equal(weights.w_l, np.broadcast_to(weights.w_l[0], weights.w_l.shape))
        np.testing.assert_array_equal(weights.w_d, np.broadcast_to(weights.w_d[0], weights.w_d.shape))

    @pytest.mark.parametrize("delta", [0.05, 0.4])
    def test_increments_bounded_by_delta(self, delta):
        weights = generate_shift_weights(ShiftConfig(delta=delta, T=30, seed=1))
        assert np.abs(np.diff(weights.w_l, axis=0)).max() <= delta
        assert np.abs(np.diff(weights.w_d, axis=0)).max() <= delta
        assert np.abs(np.diff(weights.w_l, axis=0)).max() > 0.0

    def test_shapes(self):
        weights = generate_shift_weights(ShiftConfig(d=3, l=10, T=48))
        assert weights.w_l.shape == (48, 10)
        assert weights.w_d.shape == (48, 3)

    def test_seed_determinism(self):
        first = generate_shift_weights(ShiftConfig(delta=0.1, seed=9))
        second = generate_shift_weights(ShiftConfig(delta=0.1, seed=9))
        np.testing.assert_array_equal(first.w_l, second.w_l)


class TestScores:
    def test_window_uses_only_past_steps(self):
        config = ShiftConfig(d=1, l=2, T=4)
        weights = generate_shift_weights(config)
        weights.w_l[:] = 1.0
        weights.w_d[:] = 1.0
        x = np.array([[[1.0], [2.0], [3.0], [4.0]]])
        # step t sees x_{t-2} + x_{t-1}, zero before the start
        expected = 1.0 / (1.0 + np.exp(-np.array([0.0, 1.0, 3.0, 5.0])))
        np.testing.assert_allclose(compute_scores(x, weights)[0], expected)

    def test_threshold_is_quantile(self):
        scores = np.linspace(0.0, 1.0, 101)
        assert label_threshold(scores, 0.25) == pytest.approx(0.75)

    def test_degenerate_scores(self):
        with pytest.raises(GenerationError, match="equal"):
            label_threshold(np.full((4, 5), 0.5), 0.25)


class TestGenerateDataset:
    @pytest.mark.parametrize("delta", DELTA_GRID)
    def test_positive_ratio_near_r(self, delta):
        dataset = generate_dataset(ShiftConfig(delta=delta, T=20, n_train=500, n_test=500, seed=2))
        for split in ("train", "validation", "test"):
            assert abs(dataset.positive_ratio(split) - 0.25) <= 0.01

    def test_split_sizes_and_shapes(self, tiny_dataset):
        assert len(tiny_dataset.train) == 32
        assert len(tiny_dataset.validation) == 8
        assert len(tiny_dataset.test) == 20
        X, Y = tiny_dataset.arrays("train")
        assert X.shape == (32, 6, 2)
        assert Y.shape == (32, 6)
        assert set(np.unique(Y)) <= {0.0, 1.0}

    def test_labels_follow_the_generating_law(self, tiny_dataset):
        for split in ("train", "validation", "test"):
            X, Y = tiny_dataset.arrays(split)
            relabelled = relabel(X, tiny_dataset.weights, tiny_dataset.thresholds[split])
            np.testing.assert_array_equal(relabelled, Y)

    def test_train_threshold_scope(self, tiny_shift):
        dataset = generate_dataset(tiny_shift.model_copy(update={"threshold_scope": "train"}))
        assert len(set(dataset.thresholds.values())) == 1

    def test_same_config_same_data(self, tiny_shift):
        first, second = generate_dataset(tiny_shift), generate_dataset(tiny_shift)
        np.testing.assert_array_equal(first.arrays("test")[0], second.arrays("test")[0])

    def test_all_zero_features(self):
        with pytest.raises(GenerationError):
            generate_dataset(ShiftConfig(sparsity=0.0, T=6, l=3, n_train=10, n_test=10))

    def test_window_longer_than_sequence(self):
        with pytest.raises(ValidationError, match="exceeds"):
            ShiftConfig(l=12, T=10)

    def test_no_validation_split(self, tiny_shift):
        dataset = generate_dataset(tiny_shift.model_copy(update={"validation_fraction": 0.0}))
        assert dataset.validation == []
        assert dataset.arrays("validation")[0].shape == (0, 6, 2)
        assert np.isnan(dataset.positive_ratio("validation"))

    def test_unknown_split(self, tiny_dataset):
        with pytest.raises(KeyError):
            tiny_dataset.split("holdout")


class TestStorage:
    def test_save_load(self, tiny_dataset, tmp_path):
        save_dataset(tiny_dataset, tmp_path / "data", provenance={"config_hash": "abc"})
        loaded = load_dataset(tmp_path / "data")
        for split in ("train", "validation", "test"):
            np.testing.assert_array_equal(loaded.arrays(split)[0], tiny_dataset.arrays(split)[0])
            np.testing.assert_array_equal(loaded.arrays(split)[1], tiny_dataset.arrays(split)[1])
        np.testing.assert_array_equal(loaded.weights.w_l, tiny_dataset.weights.w_l)
        assert loaded.config == tiny_dataset.config
        assert loaded.thresholds == tiny_dataset.thresholds

    def test_loaded_labels_can_be_regenerated(self, tiny_dataset, tmp_path):
        save_dataset(tiny_dataset, tmp_path)
        loaded = load_dataset(tmp_path)
        X, Y = loaded.arrays("test")
        np.testing.assert_array_equal(relabel(X, loaded.weights, loaded.thresholds["test"]), Y)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ConfigurationError, match="no dataset"):
            load_dataset(tmp_path / "nothing")
