"""
Tests for the MAES model, its losses and the training loop
"""

import math

import numpy as np
import pytest

from src.datagen import generate_dataset
from src.diffcore import ParamSet, Tensor, backward, exp, gradcheck, log_softmax
from src.errors import TrainingError, UsageError
from src.maes import (
    BestTracker,
    EnsembleSpec,
    MaesModel,
    TrainConfig,
    TrainingHistory,
    bce_loss,
    importance_loss,
    maes_forward,
    maes_loss,
    maes_predict_hard,
    run_phase,
    total_loss,
    train_maes,
    validation_loss,
)
from src.metrics import mean_apr_or_nan
from src.seqmodels import ExpertSpec


def tiny_spec(n_experts=2, kind="additive"):
    return EnsembleSpec(
        expert_specs=[ExpertSpec(hidden_dim=3) for _ in range(n_experts)],
        context_hidden_dim=3, encoding_dim=3, attention_dim=3, attention_kind=kind,
    )


def tiny_train(**updates):
    return TrainConfig(**{"epochs": 2, "batch_size": 16, "learning_rate": 0.01, "seed": 1, **updates})


class TestMaesForward:
    def test_single_expert_is_the_expert(self, rng):
        model = MaesModel(tiny_spec(1), input_dim=2, seed=0)
        x = rng.normal(size=(3, 5, 2))
        ensemble, expert_preds, weights = maes_forward(model, x)
        np.testing.assert_array_equal(weights.alpha, np.ones((3, 5, 1)))
        np.testing.assert_array_equal(ensemble, expert_preds[..., 0])

    def test_identical_experts(self, rng):
        model = MaesModel(tiny_spec(3), input_dim=2, seed=0)
        for expert in model.experts[1:]:
            expert.params.restore(model.experts[0].params.snapshot())
        x = rng.normal(size=(2, 4, 2))
        ensemble, expert_preds, _ = maes_forward(model, x)
        np.testing.assert_allclose(ensemble, expert_preds[..., 0], atol=1e-12)

    def test_shapes_and_simplex(self, rng):
        model = MaesModel(tiny_spec(3), input_dim=2, seed=4)
        ensemble, expert_preds, weights = maes_forward(model, rng.normal(size=(2, 6, 2)))
        assert ensemble.shape == (2, 6)
        assert expert_preds.shape == (2, 6, 3)
        assert weights.check_simplex()

    def test_ensemble_inside_expert_envelope(self, rng):
        model = MaesModel(tiny_spec(3), input_dim=2, seed=2)
        ensemble, expert_preds, _ = maes_forward(model, rng.normal(size=(4, 5, 2)))
        assert np.all(ensemble >= expert_preds.min(axis=-1) - 1e-12)
        assert np.all(ensemble <= expert_preds.max(axis=-1) + 1e-12)

    def test_hard_prediction_uses_argmax_expert(self, rng):
        model = MaesModel(tiny_spec(3), input_dim=2, seed=5)
        x = rng.normal(size=(3, 4, 2))
        _, expert_preds, weights = maes_forward(model, x)
        chosen = weights.alpha.argmax(axis=-1)
        hard = maes_predict_hard(model, x)
        for n in range(3):
            for t in range(4):
                assert hard[n, t] == expert_preds[n, t, chosen[n, t]]

    def test_parameter_groups(self):
        model = MaesModel(tiny_spec(2), input_dim=2, seed=0)
        experts, gate = model.expert_param_names(), model.gate_param_names()
        assert set(experts) | set(gate) == set(model.params.names())
        assert not set(experts) & set(gate)
        assert all(name.startswith("expert") for name in experts)

    def test_every_expert_receives_gradient(self, rng):
        model = MaesModel(tiny_spec(3), input_dim=2, seed=5)
        x = rng.normal(size=(6, 4, 2))
        y = rng.integers(0, 2, size=(6, 4)).astype(float)
        out = model.forward(x)
        backward(total_loss(maes_loss(out.expert_preds, out.alpha, y, log_alpha=out.log_alpha), out.alpha, 0.1))
        for m in range(3):
            names = model.params.subset(f"expert{m}.")
            norm = math.sqrt(sum(float((model.params[name].grad ** 2).sum()) for name in names))
            assert norm > 0.0, f"expert {m} got no gradient"
    def test_experts_seeded_independently(self):
        model = MaesModel(tiny_spec(2), input_dim=2, seed=0)
        assert not np.array_equal(model.experts[0].params["W_ix"].values, model.experts[1].params["W_ix"].values)


class TestLosses:
    def test_hand_value(self):
        loss = maes_loss(np.array([[[0.8, 0.6]]]), np.array([[[0.5, 0.5]]]), np.array([[1.0]]))
        assert loss.item() == pytest.approx(-math.log(0.7), abs=1e-6)
        assert loss.item() == pytest.approx(0.356675, abs=1e-6)

    def test_single_expert_matches_bce(self, rng):
        for _ in range(100):
            preds = rng.uniform(0.01, 0.99, size=(3, 4))
            labels = rng.integers(0, 2, size=(3, 4)).astype(float)
            mixture = maes_loss(preds[..., None], np.ones((3, 4, 1)), labels)
            assert abs(mixture.item() - bce_loss(preds, labels).item()) <= 1e-10

    def test_probabilities_are_clamped(self):
        loss = maes_loss(np.array([[[0.0, 1.0]]]), np.array([[[1.0, 0.0]]]), np.array([[1.0]]))
        assert np.isfinite(loss.item())
        assert np.isfinite(bce_loss(np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]])).item())

    def test_non_simplex_alpha(self):
        with pytest.raises(UsageError, match="simplex"):
            maes_loss(np.full((1, 1, 2), 0.5), np.array([[[0.7, 0.7]]]), np.array([[1.0]]))

    def test_alpha_shape_mismatch(self):
        with pytest.raises(UsageError, match="shape"):
            maes_loss(np.full((1, 1, 2), 0.5), np.ones((1, 1, 1)), np.array([[1.0]]))

    def test_weight_on_correct_expert_lowers_loss(self):
        preds, labels = np.array([[[0.9, 0.2]]]), np.array([[1.0]])
        losses = [maes_loss(preds, np.array([[[a, 1.0 - a]]]), labels).item() for a in np.linspace(0, 1, 11)]
        assert all(b < a for a, b in zip(losses, losses[1:]))

    @pytest.mark.parametrize("label", [0.0, 1.0])
    def test_better_expert_never_raises_loss(self, label):
        alpha = np.array([[[0.3, 0.7]]])
        losses = []
        for p in np.linspace(0.0, 1.0, 21):
            pred = p if label == 1.0 else 1.0 - p
            losses.append(maes_loss(np.array([[[0.4, pred]]]), alpha, np.array([[label]])).item())
        assert all(b <= a for a, b in zip(losses, losses[1:]))

    def test_log_alpha_path_matches(self, rng):
        scores = rng.normal(size=(2, 3, 4))
        preds = rng.uniform(0.05, 0.95, size=(2, 3, 4))
        labels = rng.integers(0, 2, size=(2, 3)).astype(float)
        log_alpha = log_softmax(Tensor(scores))
        direct = maes_loss(preds, exp(log_alpha), labels).item()
        via_log = maes_loss(preds, exp(log_alpha), labels, log_alpha=log_alpha).item()
        assert via_log == pytest.approx(direct, rel=1e-12)

    def test_uniform_importance(self):
        N, T, M = 4, 5, 3
        assert importance_loss(np.full((N, T, M), 1.0 / M)).item() == pytest.approx(-(N * T) ** 2 / M)

    def test_concentrated_importance(self):
        alpha = np.zeros((4, 5, 3))
        alpha[..., 1] = 1.0
        assert importance_loss(alpha).item() == pytest.approx(-(4 * 5) ** 2)

    def test_cv_importance(self):
        assert importance_loss(np.full((2, 2, 4), 0.25), kind="cv").item() == pytest.approx(0.0)
        alpha = np.zeros((2, 2, 2))
        alpha[..., 0] = 1.0
        assert importance_loss(alpha, kind="cv").item() == pytest.approx(1.0)

    def test_unknown_importance_kind(self):
        with pytest.raises(UsageError):
            importance_loss(np.full((1, 1, 2), 0.5), kind="entropy")

    def test_zero_weight_returns_loss(self):
        loss = Tensor(3.0)
        assert total_loss(loss, np.full((1, 1, 2), 0.5), 0.0) is loss

    def test_weighted_total(self):
        alpha = np.full((2, 2, 2), 0.5)
        assert total_loss(Tensor(1.0), alpha, 0.5).item() == pytest.approx(1.0 + 0.5 * -8.0)

    @pytest.mark.parametrize("kind", ["printed", "cv"])
    def test_gradients(self, rng, kind):
        scores = Tensor(rng.normal(size=(2, 3, 3)), requires_grad=True)
        preds = Tensor(rng.uniform(0.05, 0.95, size=(2, 3, 3)), requires_grad=True)
        labels = rng.integers(0, 2, size=(2, 3)).astype(float)

        def objective():
            log_alpha = log_softmax(scores)
            alpha = exp(log_alpha)
            return total_loss(maes_loss(preds, alpha, labels, log_alpha=log_alpha), alpha, 0.3, kind)

        errors = gradcheck(objective, {"scores": scores, "preds": preds})
        assert max(errors.values()) < 1e-4

    def test_bce_gradients(self, rng):
        preds = Tensor(rng.uniform(0.05, 0.95, size=(3, 4)), requires_grad=True)
        labels = rng.integers(0, 2, size=(3, 4)).astype(float)
        assert gradcheck(lambda: bce_loss(preds, labels), {"preds": preds})["preds"] < 1e-4


class TestTrainMaes:
    def test_deterministic(self, tiny_dataset):
        first = train_maes(tiny_spec(), tiny_dataset, tiny_train())
        second = train_maes(tiny_spec(), tiny_dataset, tiny_train())
        for name in first.model.params.names():
            np.testing.assert_array_equal(first.model.params[name].values, second.model.params[name].values)
        assert first.history == second.history

    def test_history_records_every_epoch(self, tiny_dataset):
        trained = train_maes(tiny_spec(), tiny_dataset, tiny_train(epochs=3, pretrain_epochs=1))
        assert [(r.phase, r.epoch) for r in trained.history.records] == [("pretrain", 1), ("joint", 2), ("joint", 3)]
        assert all(np.isfinite(r.train_loss) for r in trained.history.records)

    def test_full_pretraining_leaves_gate_untouched(self, tiny_dataset):
        config = tiny_train(epochs=2, pretrain_epochs=2)
        trained = train_maes(tiny_spec(), tiny_dataset, config)
        fresh = MaesModel(tiny_spec(), input_dim=2, seed=config.seed)
        for name in fresh.gate_param_names():
            np.testing.assert_array_equal(trained.model.params[name].values, fresh.params[name].values)
        changed = [
            not np.array_equal(trained.model.params[name].values, fresh.params[name].values)
            for name in fresh.expert_param_names()
        ]
        assert any(changed)

    def test_restores_best_validation_epoch(self, tiny_dataset):
        trained = train_maes(tiny_spec(), tiny_dataset, tiny_train(epochs=4))
        history = trained.history
        scores = [-math.inf if np.isnan(v) else v for v in history.val_aprs()]
        assert history.best_epoch == history.records[int(np.argmax(scores))].epoch
        X_val, Y_val = tiny_dataset.arrays("validation")
        assert mean_apr_or_nan(trained.predict(X_val), Y_val) == pytest.approx(history.best_score, rel=1e-12)

    @pytest.mark.parametrize("kind", ["additive", "concatenation", "dot", "general"])
    def test_every_attention_kind_trains(self, tiny_dataset, kind):
        trained = train_maes(tiny_spec(kind=kind), tiny_dataset, tiny_train(epochs=1, w_imp=0.1))
        assert len(trained.history.records) == 1

    def test_bce_loss_kind(self, tiny_dataset):
        trained = train_maes(tiny_spec(), tiny_dataset, tiny_train(epochs=1, loss_kind="bce"))
        assert trained.history.records[0].val_loss > 0.0

    def test_empty_validation(self, tiny_shift):
        dataset = generate_dataset(tiny_shift.model_copy(update={"validation_fraction": 0.0}))
        with pytest.raises(TrainingError, match="validation"):
            train_maes(tiny_spec(), dataset, tiny_train())

    def test_pretraining_longer_than_training(self):
        with pytest.raises(ValueError, match="pretrain_epochs"):
            TrainConfig(epochs=2, pretrain_epochs=3)


class TestRunPhase:
    def test_non_finite_loss_stops_training(self, rng):
        params = ParamSet(seed=0)
        params.glorot("w", (2,))
        X, Y = rng.normal(size=(8, 3, 2)), rng.integers(0, 2, size=(8, 3)).astype(float)

        def loss_fn(xb, yb):
            return (params["w"] * float("nan")).sum()

        with pytest.raises(TrainingError) as caught:
            run_phase("joint", params, ["w"], loss_fn, lambda x: np.full(x.shape[:2], 0.5),
                      (X, Y), (X, Y), epochs=1, batch_size=4, learning_rate=0.01,
                      rng=rng, tracker=BestTracker(), history=TrainingHistory())
        assert caught.value.epoch == 1
        assert caught.value.batch == 0

    def test_tracker_keeps_earliest_best(self):
        params = ParamSet(seed=0)
        params.add("w", np.array([1.0]))
        tracker = BestTracker("apr")
        assert tracker.update(1, 0.5, 1.0, params)
        params["w"].values = np.array([2.0])
        assert not tracker.update(2, 0.5, 0.9, params)
        assert not tracker.update(3, float("nan"), 0.8, params)
        tracker.restore(params)
        assert tracker.best_epoch == 1
        np.testing.assert_array_equal(params["w"].values, [1.0])

    def test_tracker_loss_metric(self):
        params = ParamSet(seed=0)
        params.add("w", np.array([1.0]))
        tracker = BestTracker("loss")
        tracker.update(1, 0.9, 1.0, params)
        assert tracker.update(2, 0.1, 0.5, params)
        assert tracker.best_epoch == 2

    def test_validation_loss_keeps_batch_scale(self):
        X, Y = np.zeros((10, 3, 2)), np.zeros((10, 3))

        def batch_term(xb, yb):
            return Tensor(float(len(xb)) ** 2)

        # batches of 4, 4 and 2
        assert validation_loss(batch_term, X, Y, batch_size=4) == pytest.approx((16 + 16 + 4) / 10)
        assert validation_loss(batch_term, X, Y, batch_size=10) == pytest.approx(10.0)

    def test_validation_loss_of_summed_loss_ignores_batching(self, rng):
        X = rng.normal(size=(7, 3, 2))
        Y = rng.integers(0, 2, size=(7, 3)).astype(float)

        def summed(xb, yb):
            return Tensor(xb.sum() + yb.sum())

        expected = (X.sum() + Y.sum()) / 7
        for batch_size in (1, 3, 7, 50):
            assert validation_loss(summed, X, Y, batch_size) == pytest.approx(expected, rel=1e-12)

    def test_joint_validation_loss_matches_batched_objective(self, tiny_dataset):
        config = tiny_train(epochs=1, w_imp=0.5, batch_size=8)
        trained = train_maes(tiny_spec(), tiny_dataset, config)
        X_val, Y_val = tiny_dataset.arrays("validation")
        model = trained.model

        def joint(xb, yb):
            out = model.forward(xb)
            loss = maes_loss(out.expert_preds, out.alpha, yb, log_alpha=out.log_alpha)
            return total_loss(loss, out.alpha, config.w_imp, config.importance_kind)

        # only one epoch, so the restored parameters are the recorded ones
        assert trained.history.records[0].val_loss == pytest.approx(
            validation_loss(joint, X_val, Y_val, config.batch_size), rel=1e-10
        )
