"""
Finite-difference gradient checks
"""

from typing import Callable, Mapping

import numpy as np

from .tensor import Tensor, backward


def numerical_gradient(fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central differences of the scalar fn() with respect to one tensor"""
    tensor.values = np.ascontiguousarray(tensor.values)
    grad = np.zeros(tensor.shape)
    flat = tensor.values.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = fn().item()
        flat[i] = original - h
        minus = fn().item()
        flat[i] = original
        out[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def gradcheck(fn: Callable[[], Tensor], tensors: Mapping[str, Tensor], h: float = 1e-5) -> dict[str, float]:
    """Worst-case relative error between tape and finite-difference gradients.

    ``fn`` must rebuild the graph from ``tensors`` on every call.
    """
    for _, tensor in tensors.items():
        tensor.grad = np.zeros(tensor.shape)
    backward(fn())
    analytic = {name: t.grad.copy() for name, t in tensors.items()}

    return {
        name: relative_error(analytic[name], numerical_gradient(fn, tensor, h))
        for name, tensor in tensors.items()
    }
