"""Graph transformer generators: the encoder G1 and the target-conditioned decoder G2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..numcore import Tensor
from .attention import DecoderLayer, EncoderLayer
from .config import DecoderConfig, EncoderConfig
from .module import MLP, Linear, Module


class VariantMismatch(ValueError):
    """Conditioning input does not match what the generator was built for."""


@dataclass
class SoftMol:
    """Row-stochastic annotation ``(B, n, A)`` and fiber-stochastic symmetric adjacency ``(B, n, n, E)``."""

    annotation: Tensor
    adjacency: Tensor

    @property
    def batch(self) -> int:
        return self.annotation.shape[0]

    def detach(self) -> "SoftMol":
        return SoftMol(self.annotation.detach(), self.adjacency.detach())


@dataclass
class Condition:
    """Conditioning graph for G2: ``kind`` is ``"pocket"`` or ``"ligand"``.

    Arrays carry a leading batch axis of 1 (shared) or B (per sample).
    """

    kind: str
    annotation: np.ndarray
    adjacency: np.ndarray


class OutputHeads(Module):
    """Atom logits per node and symmetric bond logits per pair, then softmax."""

    def __init__(self, d: int, atom_classes: int, bond_classes: int, rng: np.random.Generator):
        self.atom = Linear(d, atom_classes, rng)
        self.pair_i = Linear(d, bond_classes, rng, bias=False)
        self.pair_j = Linear(d, bond_classes, rng, bias=False)
        self.pair_e = Linear(d, bond_classes, rng)
        self.bond_classes = bond_classes

    def __call__(self, x: Tensor, e: Tensor) -> SoftMol:
        b, n, _ = x.shape
        x = nc.layer_norm(x)
        e = nc.layer_norm(e)
        ann = nc.softmax(self.atom(x), axis=-1)
        hi = nc.reshape(self.pair_i(x), (b, n, 1, self.bond_classes))
        hj = nc.reshape(self.pair_j(x), (b, 1, n, self.bond_classes))
        logits = nc.add(nc.add(hi, hj), self.pair_e(e))
        sym = nc.scale(nc.add(logits, nc.swapaxes(logits, 1, 2)), 0.5)
        adj = nc.softmax(sym, axis=-1)
        # the diagonal is pinned to NoBond
        eye = np.eye(n)[None, :, :, None]
        nobond = np.zeros(self.bond_classes)
        nobond[0] = 1.0
        adj = nc.add(nc.mul(adj, Tensor(1.0 - eye)), Tensor(eye * nobond))
        return SoftMol(ann, adj)


def _dropout_fn(rate: float, rng: np.random.Generator | None, train: bool):
    if rate <= 0.0 or not train:
        return None
    return lambda t: nc.dropout(t, rate, True, rng)


class Embedding(Module):
    def __init__(self, atom_in: int, bond_in: int | None, hidden: int, d: int, rng: np.random.Generator):
        self.nodes = MLP([atom_in, hidden, hidden, d], rng)
        self.edges = MLP([bond_in, hidden, hidden, d], rng) if bond_in else None

    def __call__(self, ann: Tensor, adj: Tensor | None) -> tuple[Tensor, Tensor | None]:
        x = self.nodes(ann)
        e = self.edges(adj) if self.edges is not None and adj is not None else None
        return x, e


class EncoderGenerator(Module):
    """G1: embedding MLPs, a stack of encoder layers and the output heads."""

    def __init__(self, cfg: EncoderConfig, rng: np.random.Generator):
        self.cfg = cfg
        d = cfg.model_dim
        self.embed = Embedding(cfg.atom_classes, cfg.bond_classes, cfg.embed_hidden, d, rng)
        self.layers = [EncoderLayer(d, cfg.heads, cfg.ff_mult, rng) for _ in range(cfg.depth)]
        self.heads = OutputHeads(d, cfg.atom_classes, cfg.bond_classes, rng)

    def __call__(self, z_ann, z_adj, train: bool = False, rng=None, return_attention: bool = False):
        x, e = self.embed(nc.as_tensor(z_ann), nc.as_tensor(z_adj))
        drop = _dropout_fn(self.cfg.dropout, rng, train)
        weights = []
        for layer in self.layers:
            x, e, w = layer(x, e, drop)
            weights.append(w)
        out = self.heads(x, e)
        return (out, weights) if return_attention else out


class DecoderGenerator(Module):
    """G2: refines a G1 molecule while attending to a pocket or a reference ligand."""

    def __init__(self, cfg: DecoderConfig, enc: EncoderConfig, cond_kind: str, rng: np.random.Generator):
        if cond_kind not in ("pocket", "ligand"):
            raise ValueError(f"unknown conditioning kind {cond_kind!r}")
        self.cfg = cfg
        self.cond_kind = cond_kind
        d = cfg.model_dim
        if cond_kind == "pocket":
            c_atoms, c_edges = cfg.pocket_classes, cfg.pocket_edge_classes
        else:
            c_atoms, c_edges = enc.atom_classes, enc.bond_classes
        self.cond_edge_classes = c_edges
        self.cond_atom_classes = c_atoms
        self.embed = Embedding(enc.atom_classes, enc.bond_classes, cfg.embed_hidden, d, rng)
        self.cond_embed = Embedding(c_atoms, None, cfg.embed_hidden, d, rng)
        self.layers = [DecoderLayer(d, cfg.heads, c_edges, cfg.ff_mult, rng) for _ in range(cfg.depth)]
        self.heads = OutputHeads(d, enc.atom_classes, enc.bond_classes, rng)

    def __call__(self, mol: SoftMol, cond: Condition, train: bool = False, rng=None,
                 return_attention: bool = False):
        if cond.kind != self.cond_kind:
            raise VariantMismatch(f"G2 expects a {self.cond_kind} condition, got {cond.kind}")
        if cond.annotation.shape[-1] != self.cond_atom_classes or \
                cond.adjacency.shape[-1] != self.cond_edge_classes:
            raise VariantMismatch("condition matrices have the wrong channel counts")
        x, e = self.embed(mol.annotation, mol.adjacency)
        p, _ = self.cond_embed(Tensor(cond.annotation), None)
        p_adj = Tensor(cond.adjacency)
        drop = _dropout_fn(self.cfg.dropout, rng, train)
        weights = []
        for layer in self.layers:
            x, e, p, w = layer(x, e, p, p_adj, drop)
            weights.append(w)
        out = self.heads(x, e)
        return (out, weights) if return_attention else out
