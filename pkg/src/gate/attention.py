"""
Attention Gate - aligns a context vector with per-expert encodings

Scoring functions (c = context, the query; u_m = expert encoding, the key):
    additive       v^T tanh(W_1 c + W_2 u_m)
    concatenation  v^T tanh(W [c; u_m])
    dot            c^T u_m
    general        c^T W u_m
Scores are normalised over experts with a softmax.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..diffcore import (
    ParamSet,
    Tensor,
    as_tensor,
    concatenate,
    expand,
    log_softmax,
    softmax,
    stack,
    tanh,
)
from ..errors import ConfigurationError


class AttentionKind(str, Enum):
    ADDITIVE = "additive"
    CONCATENATION = "concatenation"
    DOT = "dot"
    GENERAL = "general"


@dataclass
class GateParams:
    kind: AttentionKind
    params: ParamSet
    n_experts: int
    context_dim: int
    encoding_dim: int
    attention_dim: int

    @property
    def encodings(self) -> Tensor:
        return self.params["U"]


@dataclass
class GateWeights:
    alpha: np.ndarray  # (N, T, M)

    def check_simplex(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.alpha >= 0) and np.all(np.abs(self.alpha.sum(axis=-1) - 1.0) <= tol))


def init_gate(kind, n_experts: int, context_dim: int, encoding_dim: int,
              attention_dim: int, seed: int) -> GateParams:
    """Expert encodings U (M, v) plus the trainable weights the scoring function needs"""
    kind = AttentionKind(kind)
    if n_experts < 1:
        raise ConfigurationError(f"gate needs at least one expert, got {n_experts}")
    if kind is AttentionKind.DOT and encoding_dim != context_dim:
        raise ConfigurationError(
            f"dot attention needs encoding_dim == context_dim, got {encoding_dim} and {context_dim}"
        )

    params = ParamSet(seed)
    params.glorot("U", (n_experts, encoding_dim))
    if kind is AttentionKind.ADDITIVE:
        params.glorot("W_1", (attention_dim, context_dim))
        params.glorot("W_2", (attention_dim, encoding_dim))
        params.glorot("v", (attention_dim,))
    elif kind is AttentionKind.CONCATENATION:
        params.glorot("W", (attention_dim, context_dim + encoding_dim))
        params.glorot("v", (attention_dim,))
    elif kind is AttentionKind.GENERAL:
        params.glorot("W", (context_dim, encoding_dim))

    return GateParams(
        kind=kind,
        params=params,
        n_experts=n_experts,
        context_dim=context_dim,
        encoding_dim=encoding_dim,
        attention_dim=attention_dim,
    )


def score(kind, u_m, c_t, params) -> Tensor:
    """Alignment of one encoding u_m (v,) with contexts c_t (..., C) -> (...)"""
    kind = AttentionKind(kind)
    u_m, c_t = as_tensor(u_m), as_tensor(c_t)

    if kind is AttentionKind.ADDITIVE:
        return tanh(c_t @ params["W_1"].T + u_m @ params["W_2"].T) @ params["v"]
    if kind is AttentionKind.CONCATENATION:
        keys = expand(u_m, c_t.shape[:-1] + u_m.shape)
        return tanh(concatenate([c_t, keys], axis=-1) @ params["W"].T) @ params["v"]
    if kind is AttentionKind.DOT:
        return c_t @ u_m
    return (c_t @ params["W"]) @ u_m


def score_matrix(gate: GateParams, context) -> Tensor:
    """Scores of every expert for every context: (..., C) -> (..., M)"""
    U = gate.encodings
    scores = [score(gate.kind, U[m], context, gate.params) for m in range(gate.n_experts)]
    return stack(scores, axis=-1)


def gate_weights(scores) -> Tensor:
    """Softmax over the expert axis (max-subtracted)"""
    return softmax(scores, axis=-1)


def gate_log_weights(scores) -> Tensor:
    return log_softmax(scores, axis=-1)


def gate_select_hard(weights) -> np.ndarray | int:
    """Index of the heaviest expert; ties go to the lowest index"""
    weights = np.asarray(weights.values if isinstance(weights, Tensor) else weights)
    index = np.argmax(weights, axis=-1)
    return int(index) if np.ndim(index) == 0 else index
