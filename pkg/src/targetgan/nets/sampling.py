"""Discretization of generator output into one-hot molecule matrices."""

from __future__ import annotations

import numpy as np

from ..chem.elements import Element
from ..chem.matrices import MolMatrices

NULL = int(Element.NULL)


def _categorical(p: np.ndarray, tau: float, rng: np.random.Generator) -> np.ndarray:
    logp = np.log(np.clip(p, 1e-300, None)) / tau
    logp -= logp.max(axis=-1, keepdims=True)
    w = np.exp(logp)
    w /= w.sum(axis=-1, keepdims=True)
    u = rng.random(w.shape[:-1] + (1,))
    idx = (np.cumsum(w, axis=-1) < u).sum(axis=-1)
    return np.minimum(idx, w.shape[-1] - 1)


def sample_classes(annotation: np.ndarray, adjacency: np.ndarray, mode: str = "argmax",
                   tau: float = 1.0, rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Class indices for one soft molecule ``(n, A)``, ``(n, n, E)``."""
    n = annotation.shape[0]
    if mode == "argmax":
        atoms = annotation.argmax(-1)
        bonds = adjacency.argmax(-1)
    elif mode == "temperature":
        if rng is None:
            raise ValueError("temperature sampling needs an rng")
        atoms = _categorical(annotation, tau, rng)
        bonds = _categorical(adjacency, tau, rng)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    upper = np.triu(bonds, 1)
    bonds = upper + upper.T
    real = atoms != NULL
    bonds[~(real[:, None] & real[None, :])] = 0
    bonds[np.arange(n), np.arange(n)] = 0
    return atoms, bonds


def sample_discrete(annotation: np.ndarray, adjacency: np.ndarray, mode: str = "argmax",
                    tau: float = 1.0, rng: np.random.Generator | None = None) -> list[MolMatrices]:
    """Batch ``(B, n, A)``, ``(B, n, n, E)`` of soft matrices to one-hot matrices."""
    annotation = np.asarray(annotation)
    adjacency = np.asarray(adjacency)
    if annotation.ndim == 2:
        annotation, adjacency = annotation[None], adjacency[None]
    return [MolMatrices.from_classes(*sample_classes(a, b, mode, tau, rng))
            for a, b in zip(annotation, adjacency)]
