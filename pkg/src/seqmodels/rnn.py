"""
Context RNN - single-layer tanh recurrence whose hidden states are the gate's queries
"""

import numpy as np

from ..diffcore import ParamSet, Tensor, no_grad, stack, tanh
from ..errors import ConfigurationError


def init_rnn_params(hidden_dim: int, input_dim: int, seed: int) -> ParamSet:
    params = ParamSet(seed)
    params.glorot("W_x", (hidden_dim, input_dim))
    params.glorot("W_h", (hidden_dim, hidden_dim))
    params.zeros("b", (hidden_dim,))
    return params


def context_forward(params: ParamSet, x) -> Tensor:
    """h_t = tanh(W_x x_t + W_h h_{t-1} + b); x (N, T, d) -> (N, T, c), or (T, d) -> (T, c)"""
    x = np.asarray(x.values if isinstance(x, Tensor) else x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3:
        raise ConfigurationError(f"context_forward: expected (N, T, d) input, got shape {x.shape}")

    hidden_dim, input_dim = params["W_x"].shape
    if x.shape[-1] != input_dim:
        raise ConfigurationError(f"context_forward: input has {x.shape[-1]} features, model expects {input_dim}")

    W_x, W_h = params["W_x"].T, params["W_h"].T
    h = Tensor(np.zeros((x.shape[0], hidden_dim)))
    states = []
    for t in range(x.shape[1]):
        h = tanh(x[:, t, :] @ W_x + h @ W_h + params["b"])
        states.append(h)

    context = stack(states, axis=1)
    return context[0] if single else context


class ContextRnn:
    def __init__(self, hidden_dim: int, input_dim: int, seed: int):
        self.hidden_dim = hidden_dim
        self.input_dim = input_dim
        self.seed = seed
        self.params = init_rnn_params(hidden_dim, input_dim, seed)

    def forward(self, x) -> Tensor:
        return context_forward(self.params, x)

    def predict(self, x) -> np.ndarray:
        with no_grad():
            return self.forward(x).values.copy()
