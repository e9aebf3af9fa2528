"""Parameter containers and the dense building blocks."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .. import numcore as nc
from ..numcore import Tensor


class Module:
    """Holds parameters and submodules as attributes, in definition order."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for key, val in vars(self).items():
            name = f"{prefix}{key}"
            if isinstance(val, Tensor) and val.requires_grad:
                yield name, val
            elif isinstance(val, Module):
                yield from val.named_parameters(name + ".")
            elif isinstance(val, (list, tuple)) and val and isinstance(val[0], Module):
                for i, sub in enumerate(val):
                    yield from sub.named_parameters(f"{name}.{i}.")

    def parameters(self) -> dict[str, Tensor]:
        return dict(self.named_parameters())

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters().values())


def xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, (fan_in, fan_out))


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, bias: bool = True):
        self.weight = Tensor(xavier(rng, n_in, n_out), requires_grad=True)
        self.bias = Tensor(np.zeros(n_out), requires_grad=True) if bias else None
        self.n_in = n_in
        self.n_out = n_out

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.n_in:
            raise nc.ShapeMismatch(f"linear expects {self.n_in} features, got {x.shape[-1]}")
        lead = x.shape[:-1]
        y = nc.matmul(nc.reshape(x, (-1, self.n_in)), self.weight)
        if self.bias is not None:
            y = nc.add(y, self.bias)
        return nc.reshape(y, lead + (self.n_out,))


class MLP(Module):
    """Stack of linear layers with an activation after every hidden layer."""

    def __init__(self, sizes: list[int], rng: np.random.Generator, activation: str = "relu",
                 final_activation: str | None = None):
        self.layers = [Linear(a, b, rng) for a, b in zip(sizes[:-1], sizes[1:])]
        self.activation = activation
        self.final_activation = final_activation

    @staticmethod
    def _act(x: Tensor, kind: str | None) -> Tensor:
        if kind is None:
            return x
        return {"relu": nc.relu, "tanh": nc.tanh}[kind](x)

    def __call__(self, x: Tensor) -> Tensor:
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            x = layer(x)
            x = self._act(x, self.final_activation if i == last else self.activation)
        return x
