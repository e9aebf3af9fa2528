"""Adjacency-modulated self-attention and molecule-to-target cross-attention."""

from __future__ import annotations

import math

import numpy as np

from .. import numcore as nc
from ..numcore import Tensor
from .module import MLP, Linear, Module


def mol_self_attention(q: Tensor, k: Tensor, v: Tensor, a: Tensor,
                       scale: float | None = None) -> tuple[Tensor, Tensor]:
    """``softmax((q kᵀ / scale) * a) v`` over the last two axes.

    ``q, k, v`` are ``(..., n, dk)`` and ``a`` is ``(..., n, n)``; ``scale``
    defaults to ``sqrt(dk)``.  Returns the new node features and the
    row-stochastic attention weights.
    """
    q, k, v, a = (nc.as_tensor(t) for t in (q, k, v, a))
    if scale is None:
        scale = math.sqrt(q.shape[-1])
    n = q.shape[-2]
    if k.shape[-2] != n or a.shape[-2:] != (n, n):
        raise nc.ShapeMismatch(f"self-attention shapes q{q.shape} k{k.shape} a{a.shape}")
    logits = nc.scale(nc.matmul(q, nc.swapaxes(k, -1, -2)), 1.0 / scale)
    w = nc.softmax(nc.mul(logits, a), axis=-1)
    return nc.matmul(w, v), w


def cross_attention(q: Tensor, kp: Tensor, vp: Tensor, am2: Tensor, ap: Tensor,
                    scale: float | None = None) -> tuple[Tensor, Tensor]:
    """``softmax(am2 · (q kpᵀ / scale) · ap) vp``.

    ``q`` is ``(..., n, dk)``, ``kp`` and ``vp`` are ``(..., P, dk)``,
    ``am2`` is ``(..., n, n)`` and ``ap`` is ``(..., P, P)``.  The product
    ``(q kpᵀ) ap`` is evaluated as ``q (apᵀ kp)ᵀ`` which never forms the
    ``P × P`` by ``n × P`` product.
    """
    q, kp, vp, am2, ap = (nc.as_tensor(t) for t in (q, kp, vp, am2, ap))
    if scale is None:
        scale = math.sqrt(q.shape[-1])
    n, p = q.shape[-2], kp.shape[-2]
    if vp.shape[-2] != p or am2.shape[-2:] != (n, n) or ap.shape[-2:] != (p, p):
        raise nc.ShapeMismatch(
            f"cross-attention shapes q{q.shape} kp{kp.shape} vp{vp.shape} am2{am2.shape} ap{ap.shape}")
    kp_mixed = nc.matmul(nc.swapaxes(ap, -1, -2), kp)
    logits = nc.scale(nc.matmul(q, nc.swapaxes(kp_mixed, -1, -2)), 1.0 / scale)
    w = nc.softmax(nc.matmul(am2, logits), axis=-1)
    return nc.matmul(w, vp), w


def split_heads(x: Tensor, heads: int) -> Tensor:
    """``(B, n, d)`` to ``(B, h, n, d/h)``."""
    b, n, d = x.shape
    return nc.transpose(nc.reshape(x, (b, n, heads, d // heads)), (0, 2, 1, 3))


def merge_heads(x: Tensor) -> Tensor:
    b, h, n, dk = x.shape
    return nc.reshape(nc.transpose(x, (0, 2, 1, 3)), (b, n, h * dk))


def edge_to_heads(e: Tensor) -> Tensor:
    """``(B, n, n, h)`` to ``(B, h, n, n)``."""
    return nc.transpose(e, (0, 3, 1, 2))


def heads_to_edge(w: Tensor) -> Tensor:
    return nc.transpose(w, (0, 2, 3, 1))


class FeedForward(Module):
    def __init__(self, d: int, mult: int, rng: np.random.Generator):
        self.net = MLP([d, d * mult, d], rng, activation="relu")

    def __call__(self, x: Tensor) -> Tensor:
        return self.net(x)


class GraphSelfAttention(Module):
    """One adjacency-modulated attention block over nodes and edges.

    Node features ``x`` are ``(B, n, d)`` and edge features ``e`` are
    ``(B, n, n, d)``.  Edges are projected to one scalar per head which
    multiplies the attention logits; the new edge features are a projection
    of the per-head attention weights.
    """

    def __init__(self, d: int, heads: int, rng: np.random.Generator, update_edges: bool = True):
        self.heads = heads
        self.d = d
        self.wq = Linear(d, d, rng, bias=False)
        self.wk = Linear(d, d, rng, bias=False)
        self.wv = Linear(d, d, rng, bias=False)
        self.wo = Linear(d, d, rng)
        self.edge_gate = Linear(d, heads, rng)
        self.edge_out = Linear(heads, d, rng) if update_edges else None

    def __call__(self, x: Tensor, e: Tensor) -> tuple[Tensor, Tensor | None, Tensor]:
        q, k, v = (split_heads(f(x), self.heads) for f in (self.wq, self.wk, self.wv))
        a = edge_to_heads(self.edge_gate(e))
        out, w = mol_self_attention(q, k, v, a, scale=math.sqrt(self.d))
        x_new = self.wo(merge_heads(out))
        e_new = self.edge_out(heads_to_edge(w)) if self.edge_out is not None else None
        return x_new, e_new, w


class EncoderLayer(Module):
    """Pre-norm graph transformer layer with residual node and edge streams."""

    def __init__(self, d: int, heads: int, ff_mult: int, rng: np.random.Generator):
        self.attn = GraphSelfAttention(d, heads, rng)
        self.ff_x = FeedForward(d, ff_mult, rng)
        self.ff_e = FeedForward(d, ff_mult, rng)

    def __call__(self, x: Tensor, e: Tensor, drop=None) -> tuple[Tensor, Tensor, Tensor]:
        dx, de, w = self.attn(nc.layer_norm(x), nc.layer_norm(e))
        if drop is not None:
            dx, de = drop(dx), drop(de)
        x = nc.add(x, dx)
        e = nc.add(e, de)
        x = nc.add(x, self.ff_x(nc.layer_norm(x)))
        e = nc.add(e, self.ff_e(nc.layer_norm(e)))
        return x, e, w


class ConditionLayer(Module):
    """Self-attention over the conditioning graph (pocket or reference ligand).

    The conditioning adjacency is embedded once per layer to one scalar per
    head; no edge stream is carried, which keeps the 450-atom pocket cheap.
    """

    def __init__(self, d: int, heads: int, edge_classes: int, ff_mult: int, rng: np.random.Generator):
        self.heads = heads
        self.d = d
        self.wq = Linear(d, d, rng, bias=False)
        self.wk = Linear(d, d, rng, bias=False)
        self.wv = Linear(d, d, rng, bias=False)
        self.wo = Linear(d, d, rng)
        self.edge_gate = Linear(edge_classes, heads, rng)
        self.ff = FeedForward(d, ff_mult, rng)

    def __call__(self, p: Tensor, adj: Tensor) -> tuple[Tensor, Tensor]:
        pn = nc.layer_norm(p)
        q, k, v = (split_heads(f(pn), self.heads) for f in (self.wq, self.wk, self.wv))
        a = edge_to_heads(self.edge_gate(adj))
        out, w = mol_self_attention(q, k, v, a, scale=math.sqrt(self.d))
        p = nc.add(p, self.wo(merge_heads(out)))
        p = nc.add(p, self.ff(nc.layer_norm(p)))
        return p, w


class CrossAttention(Module):
    def __init__(self, d: int, heads: int, rng: np.random.Generator):
        self.heads = heads
        self.d = d
        self.wq = Linear(d, d, rng, bias=False)
        self.wk = Linear(d, d, rng, bias=False)
        self.wv = Linear(d, d, rng, bias=False)
        self.wo = Linear(d, d, rng, bias=False)

    def __call__(self, x: Tensor, p: Tensor, am2: Tensor, ap: Tensor) -> tuple[Tensor, Tensor]:
        q = split_heads(self.wq(x), self.heads)
        kp = split_heads(self.wk(p), self.heads)
        vp = split_heads(self.wv(p), self.heads)
        out, w = cross_attention(q, kp, vp, am2, ap, scale=math.sqrt(self.d))
        return self.wo(merge_heads(out)), w


class DecoderLayer(Module):
    """Condition self-attention, molecule self-attention, cross-attention, feedforward."""

    def __init__(self, d: int, heads: int, cond_edge_classes: int, ff_mult: int,
                 rng: np.random.Generator):
        self.cond = ConditionLayer(d, heads, cond_edge_classes, ff_mult, rng)
        self.self_attn = GraphSelfAttention(d, heads, rng)
        self.cross = CrossAttention(d, heads, rng)
        self.ff_x = FeedForward(d, ff_mult, rng)
        self.ff_e = FeedForward(d, ff_mult, rng)

    def __call__(self, x, e, p, p_adj, drop=None):
        p, wp = self.cond(p, p_adj)
        dx, de, wm = self.self_attn(nc.layer_norm(x), nc.layer_norm(e))
        if drop is not None:
            dx, de = drop(dx), drop(de)
        x = nc.add(x, dx)
        e = nc.add(e, de)
        dx, wc = self.cross(nc.layer_norm(x), nc.layer_norm(p), wm, wp)
        x = nc.add(x, dx)
        x = nc.add(x, self.ff_x(nc.layer_norm(x)))
        e = nc.add(e, self.ff_e(nc.layer_norm(e)))
        return x, e, p, (wm, wp, wc)
