"""MLP critics over flattened annotation and adjacency matrices."""

from __future__ import annotations

import numpy as np

from .. import numcore as nc
from ..numcore import Tensor
from .config import DiscriminatorConfig, EncoderConfig
from .module import MLP, Module


def flatten_pair(annotation, adjacency) -> Tensor:
    """``(B, n, A)`` and ``(B, n, n, E)`` to ``(B, n*A + n*n*E)``."""
    a = nc.as_tensor(annotation)
    b = nc.as_tensor(adjacency)
    return nc.concat([nc.reshape(a, (a.shape[0], -1)), nc.reshape(b, (b.shape[0], -1))], axis=1)


class Discriminator(Module):
    """tanh MLP producing one score in [-1, 1] per sample."""

    def __init__(self, cfg: DiscriminatorConfig, enc: EncoderConfig, rng: np.random.Generator):
        n = enc.max_atoms
        self.n_in = n * enc.atom_classes + n * n * enc.bond_classes
        self.mlp = MLP([self.n_in, *cfg.sizes], rng, activation="tanh", final_activation="tanh")

    def score_flat(self, flat: Tensor) -> Tensor:
        if flat.shape[-1] != self.n_in:
            raise nc.ShapeMismatch(f"critic expects {self.n_in} inputs, got {flat.shape[-1]}")
        return nc.reshape(self.mlp(flat), (flat.shape[0],))

    def __call__(self, annotation, adjacency) -> Tensor:
        return self.score_flat(flatten_pair(annotation, adjacency))


def discriminate(d: Discriminator, annotation, adjacency) -> Tensor:
    return d(annotation, adjacency)
