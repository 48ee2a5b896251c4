"""
Adam optimizer with bias correction
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError
from .params import ParamSet


@dataclass
class AdamState:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)


def create_adam_state(params: ParamSet, names=None, learning_rate: float = 0.001,
                      beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """Moments for the named parameters (all of them by default)"""
    names = list(names) if names is not None else params.names()
    state = AdamState(learning_rate=learning_rate, beta1=beta1, beta2=beta2, eps=eps)
    for name in names:
        shape = params[name].shape
        state.first_moment[name] = np.zeros(shape)
        state.second_moment[name] = np.zeros(shape)
    return state


def adam_step(params: ParamSet, state: AdamState) -> ParamSet:
    """Apply one update to every parameter tracked by the state, then zero its grad"""
    for name in state.first_moment:
        if params[name].grad is None:
            raise UsageError(f"parameter '{name}' has no gradient; run backward first")

    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step

    for name, m in state.first_moment.items():
        tensor = params[name]
        grad = tensor.grad
        v = state.second_moment[name]
        m[...] = state.beta1 * m + (1.0 - state.beta1) * grad
        v[...] = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        tensor.values = tensor.values - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
        tensor.grad = np.zeros_like(grad)

    return params
