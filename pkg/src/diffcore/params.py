"""
ParamSet - named, seeded collection of trainable tensors
"""

from typing import Iterator, Mapping

import numpy as np

from ..errors import ConfigurationError
from .tensor import DTYPE, Tensor


class ParamSet:
    """Ordered name -> Tensor mapping with reproducible initialisation.

    Parameters are drawn from a generator seeded with ``seed`` in the order
    they are added, so rebuilding a model with the same seed gives
    bit-identical values.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._params: dict[str, Tensor] = {}

    # Construction

    def add(self, name: str, values) -> Tensor:
        if name in self._params:
            raise ConfigurationError(f"parameter '{name}' already exists")
        tensor = Tensor(values, requires_grad=True, name=name)
        tensor.grad = np.zeros(tensor.shape, dtype=DTYPE)
        self._params[name] = tensor
        return tensor

    def glorot(self, name: str, shape: tuple) -> Tensor:
        """Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))"""
        if len(shape) == 1:
            fan_in, fan_out = shape[0], 1
        else:
            fan_out, fan_in = shape[0], shape[1]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return self.add(name, self._rng.uniform(-limit, limit, size=shape))

    def zeros(self, name: str, shape: tuple) -> Tensor:
        return self.add(name, np.zeros(shape, dtype=DTYPE))

    @classmethod
    def combine(cls, parts: Mapping[str, "ParamSet"], seed: int = 0) -> "ParamSet":
        """View several parameter sets as one; tensors are shared, not copied"""
        combined = cls(seed)
        for prefix, part in parts.items():
            for name, tensor in part.items():
                full = f"{prefix}.{name}"
                if full in combined._params:
                    raise ConfigurationError(f"parameter '{full}' already exists")
                combined._params[full] = tensor
        return combined

    # Mapping protocol

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._params[name]
        except KeyError:
            raise ConfigurationError(f"unknown parameter '{name}'") from None

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def subset(self, prefix: str) -> list[str]:
        return [name for name in self._params if name.startswith(prefix)]

    def count(self) -> int:
        return int(sum(t.values.size for t in self._params.values()))

    # State handling

    def zero_grad(self, names=None) -> None:
        for name in names or self._params:
            tensor = self._params[name]
            tensor.grad = np.zeros(tensor.shape, dtype=DTYPE)

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.values.copy() for name, t in self._params.items()}

    def restore(self, snapshot: Mapping[str, np.ndarray]) -> None:
        for name, values in snapshot.items():
            tensor = self[name]
            if tensor.shape != np.shape(values):
                raise ConfigurationError(
                    f"parameter '{name}' has shape {tensor.shape}, snapshot has {np.shape(values)}"
                )
            tensor.values = np.array(values, dtype=DTYPE)

    def to_arrays(self) -> dict[str, np.ndarray]:
        return self.snapshot()

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        missing = set(self._params) - set(arrays)
        if missing:
            raise ConfigurationError(f"checkpoint is missing parameters: {sorted(missing)}")
        self.restore({name: arrays[name] for name in self._params})
