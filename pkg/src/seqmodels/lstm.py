"""
LSTM Expert - single recurrent layer with a time-distributed sigmoid head
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from ..diffcore import ParamSet, Tensor, as_tensor, no_grad, sigmoid, stack, tanh
from ..errors import ConfigurationError

GATES = ("i", "f", "o", "c")


class ExpertSpec(BaseModel):
    hidden_dim: int = Field(ge=1)
    output_dim: int = Field(default=1, ge=1)
    cell_variant: Literal["standard", "paper-sigma"] = "standard"


@dataclass
class LstmState:
    h: Tensor
    C: Tensor
    i: Tensor | None = None
    f: Tensor | None = None
    o: Tensor | None = None
    C_tilde: Tensor | None = None


def init_lstm_params(spec: ExpertSpec, input_dim: int, seed: int) -> ParamSet:
    """Glorot-uniform matrices, zero biases (forget gate included)"""
    h = spec.hidden_dim
    params = ParamSet(seed)
    for gate in GATES:
        params.glorot(f"W_{gate}x", (h, input_dim))
        params.glorot(f"W_{gate}h", (h, h))
    for gate in GATES:
        params.zeros(f"b_{gate}", (h,))
    params.glorot("head_W", (h, spec.output_dim))
    params.zeros("head_b", (spec.output_dim,))
    return params


def zero_state(batch_shape: tuple, hidden_dim: int) -> LstmState:
    zeros = np.zeros(tuple(batch_shape) + (hidden_dim,))
    return LstmState(h=Tensor(zeros), C=Tensor(zeros))


def lstm_step(params: ParamSet, x_t, state: LstmState, cell_variant: str = "standard",
              transposed: dict | None = None) -> LstmState:
    """One cell update.

    i, f, o = sigmoid(W_*x x_t + W_*h h_{t-1} + b_*)
    C~      = tanh(W_cx x_t + W_ch h_{t-1} + b_c)
    C_t     = f * C_{t-1} + i * C~        (paper-sigma: sigmoid of the same sum)
    h_t     = tanh(C_t) * o

    ``transposed`` may carry precomputed W.T tensors so a full sequence only
    records one transpose per matrix.
    """
    x_t = as_tensor(x_t)
    W = transposed or {name: params[name].T for name in params if name.startswith("W_")}
    input_dim = W["W_ix"].shape[0]
    if x_t.shape[-1] != input_dim:
        raise ConfigurationError(f"lstm_step: input has {x_t.shape[-1]} features, cell expects {input_dim}")
    if state.h.shape[-1] != W["W_ih"].shape[0]:
        raise ConfigurationError(
            f"lstm_step: hidden state has size {state.h.shape[-1]}, cell expects {W['W_ih'].shape[0]}"
        )

    def pre(gate):
        return x_t @ W[f"W_{gate}x"] + state.h @ W[f"W_{gate}h"] + params[f"b_{gate}"]

    i = sigmoid(pre("i"))
    f = sigmoid(pre("f"))
    o = sigmoid(pre("o"))
    C_tilde = tanh(pre("c"))
    C = f * state.C + i * C_tilde
    if cell_variant == "paper-sigma":
        C = sigmoid(C)
    elif cell_variant != "standard":
        raise ConfigurationError(f"unknown cell variant '{cell_variant}'")
    h = tanh(C) * o

    return LstmState(h=h, C=C, i=i, f=f, o=o, C_tilde=C_tilde)


def expert_forward(spec: ExpertSpec, params: ParamSet, x) -> Tensor:
    """Class-1 probabilities for every step: x (N, T, d) -> (N, T), or (T, d) -> (T,)"""
    x = np.asarray(x.values if isinstance(x, Tensor) else x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3:
        raise ConfigurationError(f"expert_forward: expected (N, T, d) input, got shape {x.shape}")

    transposed = {name: params[name].T for name in params if name.startswith("W_")}
    state = zero_state((x.shape[0],), spec.hidden_dim)
    hidden = []
    for t in range(x.shape[1]):
        state = lstm_step(params, x[:, t, :], state, spec.cell_variant, transposed)
        hidden.append(state.h)

    H = stack(hidden, axis=1)
    probs = sigmoid(H @ params["head_W"] + params["head_b"])[:, :, 0]
    return probs[0] if single else probs


class LstmExpert:
    """ExpertSpec plus its parameters"""

    def __init__(self, spec: ExpertSpec, input_dim: int, seed: int):
        self.spec = spec
        self.input_dim = input_dim
        self.seed = seed
        self.params = init_lstm_params(spec, input_dim, seed)

    def forward(self, x) -> Tensor:
        return expert_forward(self.spec, self.params, x)

    def predict(self, x) -> np.ndarray:
        with no_grad():
            return self.forward(x).values.copy()
