"""
diffcore - minimal differentiable computation engine
Tensors with exact reverse-mode gradients, seeded parameters and Adam
"""

from .tensor import (
    DTYPE,
    OPS,
    Tensor,
    add,
    as_tensor,
    backward,
    clip,
    concatenate,
    div,
    exp,
    expand,
    forward_op,
    is_grad_enabled,
    log,
    log_softmax,
    logsumexp,
    matmul,
    mul,
    neg,
    no_grad,
    power,
    reduce_mean,
    reduce_sum,
    reshape,
    sigmoid,
    softmax,
    stable_sigmoid,
    stack,
    sub,
    take,
    tanh,
    transpose,
)
from .params import ParamSet
from .optim import AdamState, adam_step, create_adam_state
from .gradcheck import gradcheck, numerical_gradient, relative_error

__all__ = [
    "DTYPE",
    "OPS",
    "Tensor",
    "add",
    "as_tensor",
    "backward",
    "clip",
    "concatenate",
    "div",
    "exp",
    "expand",
    "forward_op",
    "is_grad_enabled",
    "log",
    "log_softmax",
    "logsumexp",
    "matmul",
    "mul",
    "neg",
    "no_grad",
    "power",
    "reduce_mean",
    "reduce_sum",
    "reshape",
    "sigmoid",
    "softmax",
    "stable_sigmoid",
    "stack",
    "sub",
    "take",
    "tanh",
    "transpose",
    "ParamSet",
    "AdamState",
    "adam_step",
    "create_adam_state",
    "gradcheck",
    "numerical_gradient",
    "relative_error",
]
