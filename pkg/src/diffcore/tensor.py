"""
Tensor - dense float64 arrays with tape-based reverse-mode gradients

Every op builds its output from numpy values and, when any input needs a
gradient, stores its parents plus a closure that pushes the output gradient
back to them. backward() walks that tape in reverse topological order.

Broadcasting rule (add, sub, mul, div): shapes must be equal, one operand
must be a scalar, or the shorter shape must be a trailing suffix of the
longer one (leading-batch broadcasting only). Anything else is a
ConfigurationError naming both shapes.
"""

import threading
from contextlib import contextmanager

import numpy as np

from ..errors import ConfigurationError, UsageError

DTYPE = np.float64

_grad_mode = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_grad_mode, "enabled", True)


@contextmanager
def no_grad():
    """Run forward ops without recording them (inference)"""
    previous = is_grad_enabled()
    _grad_mode.enabled = False
    try:
        yield
    finally:
        _grad_mode.enabled = previous


class Tensor:
    __slots__ = ("values", "grad", "requires_grad", "op", "name", "_parents", "_backward")
    # Make numpy defer binary operators (ndarray @ Tensor) to the Tensor side
    __array_ufunc__ = None

    def __init__(self, values, requires_grad: bool = False, name: str | None = None, copy: bool = True):
        self.values = np.array(values, dtype=DTYPE) if copy else np.asarray(values, dtype=DTYPE)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.op = "leaf"
        self.name = name
        self._parents: tuple = ()
        self._backward = None

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def item(self) -> float:
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values.copy()

    def __repr__(self):
        label = self.name or self.op
        return f"Tensor({label}, shape={self.shape})"

    # Operators delegate to the op functions below
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return take(self, index)

    @property
    def T(self):
        return transpose(self)

    def sum(self, axis=None, keepdims=False):
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return reduce_mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def as_tensor(value) -> Tensor:
    """Wrap numbers and arrays as constant tensors; tensors pass through"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _result(values, parents, op, backward) -> Tensor:
    out = Tensor(values, copy=False)
    out.op = op
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _accumulate(tensor: Tensor, grad: np.ndarray) -> None:
    if not tensor.requires_grad:
        return
    grad = np.asarray(grad, dtype=DTYPE).reshape(tensor.shape)
    if tensor.grad is None:
        tensor.grad = grad.copy()
    else:
        tensor.grad = tensor.grad + grad


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    sa, sb = a.shape, b.shape
    if sa == sb or sa == () or sb == ():
        return
    short, long = (sa, sb) if len(sa) < len(sb) else (sb, sa)
    if len(short) < len(long) and long[len(long) - len(short):] == short:
        return
    raise ConfigurationError(f"{op}: cannot broadcast shapes {sa} and {sb}")


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    if shape == ():
        return np.asarray(grad.sum())
    lead = grad.ndim - len(shape)
    return grad.reshape((-1,) + grad.shape[lead:]).sum(axis=0)


# Elementwise arithmetic

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    return _result(a.values + b.values, (a, b), "add", backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(-g, b.shape))

    return _result(a.values - b.values, (a, b), "sub", backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward(g):
        _accumulate(a, _unbroadcast(g * b.values, a.shape))
        _accumulate(b, _unbroadcast(g * a.values, b.shape))

    return _result(a.values * b.values, (a, b), "mul", backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "div")
    out = a.values / b.values

    def backward(g):
        _accumulate(a, _unbroadcast(g / b.values, a.shape))
        _accumulate(b, _unbroadcast(-g * out / b.values, b.shape))

    return _result(out, (a, b), "div", backward)


def neg(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accumulate(a, -g)

    return _result(-a.values, (a,), "neg", backward)


def power(a, exponent: float) -> Tensor:
    a = as_tensor(a)
    if isinstance(exponent, Tensor):
        raise UsageError("power only supports constant exponents")

    def backward(g):
        _accumulate(a, g * exponent * a.values ** (exponent - 1))

    return _result(a.values ** exponent, (a,), "pow", backward)


# Nonlinearities

def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    ex = np.exp(x[~positive])
    out[~positive] = ex / (1.0 + ex)
    return out


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = stable_sigmoid(a.values)

    def backward(g):
        _accumulate(a, g * out * (1.0 - out))

    return _result(out, (a,), "sigmoid", backward)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.values)

    def backward(g):
        _accumulate(a, g * (1.0 - out * out))

    return _result(out, (a,), "tanh", backward)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.values)

    def backward(g):
        _accumulate(a, g * out)

    return _result(out, (a,), "exp", backward)


def log(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accumulate(a, g / a.values)

    return _result(np.log(a.values), (a,), "log", backward)


def clip(a, low: float, high: float) -> Tensor:
    """Clamp values; the gradient is zero where the clamp is active"""
    a = as_tensor(a)
    inside = (a.values >= low) & (a.values <= high)

    def backward(g):
        _accumulate(a, g * inside)

    return _result(np.clip(a.values, low, high), (a,), "clip", backward)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.values - a.values.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        _accumulate(a, out * (g - (g * out).sum(axis=axis, keepdims=True)))

    return _result(out, (a,), "softmax", backward)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.values - a.values.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        probs = np.exp(out)
        _accumulate(a, g - probs * g.sum(axis=axis, keepdims=True))

    return _result(out, (a,), "log_softmax", backward)


def logsumexp(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    peak = a.values.max(axis=axis, keepdims=True)
    e = np.exp(a.values - peak)
    total = e.sum(axis=axis, keepdims=True)
    out = np.squeeze(peak + np.log(total), axis=axis)

    def backward(g):
        _accumulate(a, np.expand_dims(g, axis) * (e / total))

    return _result(out, (a,), "logsumexp", backward)


# Linear algebra and reductions

def matmul(a, b) -> Tensor:
    """a (..., k) @ b (k, m) -> (..., m), or a (..., k) @ b (k,) -> (...)"""
    a, b = as_tensor(a), as_tensor(b)
    if b.ndim not in (1, 2) or a.ndim < 1 or a.shape[-1] != b.shape[0]:
        raise ConfigurationError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    k = a.shape[-1]

    if b.ndim == 2:
        m = b.shape[1]

        def backward(g):
            _accumulate(a, g @ b.values.T)
            _accumulate(b, a.values.reshape(-1, k).T @ g.reshape(-1, m))
    else:

        def backward(g):
            g = np.asarray(g)
            _accumulate(a, g[..., None] * b.values)
            _accumulate(b, (a.values.reshape(-1, k) * g.reshape(-1, 1)).sum(axis=0))

    return _result(a.values @ b.values, (a, b), "matmul", backward)


def transpose(a) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise ConfigurationError(f"transpose: expected a matrix, got shape {a.shape}")

    def backward(g):
        _accumulate(a, g.T)

    return _result(a.values.T, (a,), "transpose", backward)


def reduce_sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(g, a.shape))

    return _result(a.values.sum(axis=axis, keepdims=keepdims), (a,), "sum", backward)


def reduce_mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.values.size if axis is None else np.prod([a.shape[i] for i in np.atleast_1d(axis)])
    return reduce_sum(a, axis=axis, keepdims=keepdims) * (1.0 / float(count))


def reshape(a, shape: tuple) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accumulate(a, g.reshape(a.shape))

    return _result(a.values.reshape(shape), (a,), "reshape", backward)


def expand(a, shape: tuple) -> Tensor:
    """Repeat a tensor along new leading (batch) axes"""
    a = as_tensor(a)
    shape = tuple(shape)
    if shape[len(shape) - a.ndim:] != a.shape:
        raise ConfigurationError(f"expand: cannot expand shape {a.shape} to {shape}")

    def backward(g):
        _accumulate(a, _unbroadcast(g, a.shape))

    return _result(np.broadcast_to(a.values, shape).copy(), (a,), "expand", backward)


def _is_basic_index(index) -> bool:
    parts = index if isinstance(index, tuple) else (index,)
    return all(isinstance(p, (int, np.integer, slice)) or p is None or p is Ellipsis for p in parts)


def take(a, index) -> Tensor:
    """Basic indexing / slicing"""
    a = as_tensor(a)

    basic = _is_basic_index(index)

    def backward(g):
        full = np.zeros(a.shape, dtype=DTYPE)
        if basic:
            full[index] += g
        else:
            np.add.at(full, index, g)
        _accumulate(a, full)

    return _result(a.values[index], (a,), "take", backward)


def concatenate(tensors, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError as exc:
        shapes = [t.shape for t in tensors]
        raise ConfigurationError(f"concatenate: incompatible shapes {shapes}") from exc
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        for t, piece in zip(tensors, np.split(g, bounds, axis=axis)):
            _accumulate(t, piece)

    return _result(out, tuple(tensors), "concatenate", backward)


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ConfigurationError(f"stack: tensors have different shapes {sorted(shapes)}")
    out = np.stack([t.values for t in tensors], axis=axis)

    def backward(g):
        for i, t in enumerate(tensors):
            _accumulate(t, np.take(g, i, axis=axis))

    return _result(out, tuple(tensors), "stack", backward)


OPS = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
    "neg": neg,
    "pow": power,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "clip": clip,
    "softmax": softmax,
    "log_softmax": log_softmax,
    "logsumexp": logsumexp,
    "matmul": matmul,
    "transpose": transpose,
    "sum": reduce_sum,
    "mean": reduce_mean,
    "reshape": reshape,
    "expand": expand,
    "slice": take,
    "concatenate": concatenate,
    "stack": stack,
}


def forward_op(kind: str, *inputs, **options) -> Tensor:
    """Apply a named op; list-valued ops (concatenate, stack) take one list"""
    if kind not in OPS:
        raise ConfigurationError(f"unknown op '{kind}', available: {', '.join(sorted(OPS))}")
    return OPS[kind](*inputs, **options)


def backward(loss: Tensor) -> None:
    """Populate .grad of every tensor the scalar loss depends on"""
    if loss.values.size != 1:
        raise UsageError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise UsageError("loss does not depend on any tensor that requires a gradient")

    # Iterative post-order so long recurrences do not hit the recursion limit
    order, visited = [], set()
    pending = [(loss, False)]
    while pending:
        node, expanded = pending.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        pending.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                pending.append((parent, False))

    _accumulate(loss, np.ones(loss.shape, dtype=DTYPE))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
