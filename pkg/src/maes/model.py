"""
MAES Model - LSTM experts weighted per instance and per step by an attention gate
The gate reads a context of the history so far and weighs each expert at every step.
"""

from dataclasses import dataclass

import numpy as np

from ..diffcore import ParamSet, Tensor, exp, no_grad, stack
from ..gate import GateWeights, gate_log_weights, gate_select_hard, init_gate, score_matrix
from ..seqmodels import ContextRnn, LstmExpert
from ..utils import derive_seed
from .config import EnsembleSpec

CONTEXT_KEY = 10_000
GATE_KEY = 10_001


@dataclass
class MaesOutput:
    ensemble: Tensor  # (N, T)
    expert_preds: Tensor  # (N, T, M)
    alpha: Tensor  # (N, T, M)
    log_alpha: Tensor  # (N, T, M)


class MaesModel:
    def __init__(self, spec: EnsembleSpec, input_dim: int, seed: int):
        self.spec = spec
        self.input_dim = input_dim
        self.seed = seed

        # Each component gets its own seed so expert m is reproducible on its own
        self.experts = [
            LstmExpert(expert_spec, input_dim, derive_seed(seed, m))
            for m, expert_spec in enumerate(spec.expert_specs)
        ]
        self.context = ContextRnn(spec.context_hidden_dim, input_dim, derive_seed(seed, CONTEXT_KEY))
        self.gate = init_gate(
            spec.attention_kind,
            n_experts=spec.n_experts,
            context_dim=spec.context_hidden_dim,
            encoding_dim=spec.encoding_dim,
            attention_dim=spec.attention_dim,
            seed=derive_seed(seed, GATE_KEY),
        )

        parts = {f"expert{m}": expert.params for m, expert in enumerate(self.experts)}
        parts["context"] = self.context.params
        parts["gate"] = self.gate.params
        self.params = ParamSet.combine(parts, seed)

    @property
    def n_experts(self) -> int:
        return len(self.experts)

    def expert_param_names(self) -> list[str]:
        return self.params.subset("expert")

    def gate_param_names(self) -> list[str]:
        return self.params.subset("context.") + self.params.subset("gate.")

    def forward(self, x) -> MaesOutput:
        x = np.asarray(x, dtype=np.float64)
        expert_preds = stack([expert.forward(x) for expert in self.experts], axis=-1)

        context = self.context.forward(x)
        log_alpha = gate_log_weights(score_matrix(self.gate, context))
        alpha = exp(log_alpha)
        ensemble = (alpha * expert_preds).sum(axis=-1)
        return MaesOutput(ensemble=ensemble, expert_preds=expert_preds, alpha=alpha, log_alpha=log_alpha)


def maes_forward(model: MaesModel, x) -> tuple[np.ndarray, np.ndarray, GateWeights]:
    """Inference: (ensemble (N, T), expert predictions (N, T, M), gate weights)"""
    with no_grad():
        out = model.forward(x)
    return out.ensemble.values.copy(), out.expert_preds.values.copy(), GateWeights(alpha=out.alpha.values.copy())


def maes_predict_hard(model: MaesModel, x) -> np.ndarray:
    """Hard attention at inference: each (n, t) takes the prediction of its argmax expert"""
    _, expert_preds, weights = maes_forward(model, x)
    chosen = gate_select_hard(weights.alpha)
    return np.take_along_axis(expert_preds, chosen[..., None], axis=-1)[..., 0]
