"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every differentiable op records a node on the active :class:`Tape`.  Backward
rules are written in terms of :class:`Tensor` ops themselves, so running the
backward pass while recording (``create_graph=True``) yields a differentiable
gradient graph.  A handful of fused ops (softmax, log_softmax, layer_norm,
dropout) carry raw numpy backward rules for speed; they refuse to take part in
a nested (second-order) pass instead of silently returning wrong curvature.
"""

from __future__ import annotations

import contextlib
import threading
from typing import Callable, Iterable, Sequence

import numpy as np


class NumcoreError(Exception):
    """Base class for tensor engine errors."""


class ShapeMismatch(NumcoreError, ValueError):
    pass


class NonFiniteValue(NumcoreError, FloatingPointError):
    pass


class NotScalarLoss(NumcoreError, ValueError):
    pass


class NestedTapeUnsupported(NumcoreError):
    pass


class _State(threading.local):
    def __init__(self) -> None:
        self.tape: Tape | None = None


_state = _State()


class Node:
    __slots__ = ("op", "inputs", "out", "vjp", "higher_order")

    def __init__(self, op, inputs, out, vjp, higher_order):
        self.op = op
        self.inputs = inputs
        self.out = out
        self.vjp = vjp
        self.higher_order = higher_order


class Tape:
    """Append-only record of differentiable ops.

    Use as a context manager; ops executed inside the block on tensors that
    require gradients are recorded.  A tape belongs to one thread.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._prev: list[Tape | None] = []

    def __enter__(self) -> Tape:
        self._prev.append(_state.tape)
        _state.tape = self
        return self

    def __exit__(self, *exc) -> None:
        _state.tape = self._prev.pop()


@contextlib.contextmanager
def no_record():
    prev = _state.tape
    _state.tape = None
    try:
        yield
    finally:
        _state.tape = prev


@contextlib.contextmanager
def _recording(tape: Tape | None):
    prev = _state.tape
    _state.tape = tape
    try:
        yield
    finally:
        _state.tape = prev


def _check_finite(data: np.ndarray, op: str) -> None:
    # a NaN or Inf anywhere makes the sum non-finite; the exact test only
    # runs to rule out an overflowing sum of finite entries
    if not np.isfinite(data.sum()) and not np.isfinite(data).all():
        raise NonFiniteValue(f"non-finite value produced by {op}")


class Tensor:
    """A float64 array that may participate in differentiation."""

    __slots__ = ("data", "requires_grad", "node", "name")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data, dtype=np.float64)
        _check_finite(arr, "constructor")
        self.data = arr
        self.requires_grad = requires_grad
        self.node: Node | None = None
        self.name = name

    # -- basic properties -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def T(self) -> Tensor:
        return swapaxes(self, -1, -2)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # -- operators ---------------------------------------------------------
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

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, index):
        return getitem(self, index)

    # -- method forms ------------------------------------------------------
    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)

    def swapaxes(self, a, b):
        return swapaxes(self, a, b)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)

    def tanh(self):
        return tanh(self)

    def relu(self):
        return relu(self)

    def sqrt(self):
        return sqrt(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, op: str, inputs: Sequence[Tensor], vjp: Callable,
          higher_order: bool = True) -> Tensor:
    _check_finite(data, op)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.name = None
    out.node = None
    out.requires_grad = False
    tape = _state.tape
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        node = Node(op, tuple(inputs), out, vjp, higher_order)
        out.node = node
        tape.nodes.append(node)
    return out


def _unbroadcast(g: Tensor, shape: tuple[int, ...]) -> Tensor:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = sum_(g, tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = sum_(g, axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data + b.data
    except ValueError as exc:
        raise ShapeMismatch(f"add: {a.shape} vs {b.shape}") from exc

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(data, "add", (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data - b.data
    except ValueError as exc:
        raise ShapeMismatch(f"sub: {a.shape} vs {b.shape}") from exc

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(neg(g), b.shape)

    return _make(data, "sub", (a, b), vjp)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data * b.data
    except ValueError as exc:
        raise ShapeMismatch(f"mul: {a.shape} vs {b.shape}") from exc

    def vjp(g):
        return _unbroadcast(mul(g, b), a.shape), _unbroadcast(mul(g, a), b.shape)

    return _make(data, "mul", (a, b), vjp)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            data = a.data / b.data
    except ValueError as exc:
        raise ShapeMismatch(f"div: {a.shape} vs {b.shape}") from exc

    def vjp(g):
        ga = div(g, b)
        gb = neg(div(mul(ga, a), b))
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _make(data, "div", (a, b), vjp)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _make(-a.data, "neg", (a,), lambda g: (neg(g),))


def scale(a, c: float) -> Tensor:
    """Multiply by a python scalar constant."""
    a = as_tensor(a)
    c = float(c)
    return _make(a.data * c, "scale", (a,), lambda g: (scale(g, c),))


def power(a, p: float) -> Tensor:
    a = as_tensor(a)
    p = float(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        data = a.data ** p

    def vjp(g):
        if p == 1.0:
            return (g,)
        return (mul(g, scale(power(a, p - 1.0), p)),)

    return _make(data, "power", (a,), vjp)


def square(a) -> Tensor:
    a = as_tensor(a)
    return _make(a.data * a.data, "square", (a,), lambda g: (mul(g, scale(a, 2.0)),))


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(invalid="ignore"):
        data = np.sqrt(a.data)
    out_holder: list[Tensor] = []

    def vjp(g):
        return (div(g, scale(out_holder[0], 2.0)),)

    out = _make(data, "sqrt", (a,), vjp)
    out_holder.append(out)
    return out


def exp(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        data = np.exp(a.data)
    holder: list[Tensor] = []
    out = _make(data, "exp", (a,), lambda g: (mul(g, holder[0]),))
    holder.append(out)
    return out


def log(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        data = np.log(a.data)
    return _make(data, "log", (a,), lambda g: (div(g, a),))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    holder: list[Tensor] = []

    def vjp(g):
        y = holder[0]
        return (mul(g, sub(1.0, mul(y, y))),)

    out = _make(np.tanh(a.data), "tanh", (a,), vjp)
    holder.append(out)
    return out


def relu(a) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        return (mul(g, (a.data > 0).astype(np.float64)),)

    return _make(np.maximum(a.data, 0.0), "relu", (a,), vjp)


# ---------------------------------------------------------------------------
# shape ops


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(shape)
    except ValueError as exc:
        raise ShapeMismatch(f"reshape {a.shape} -> {shape}") from exc
    src = a.shape
    return _make(data, "reshape", (a,), lambda g: (reshape(g, src),))


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(ax % a.ndim for ax in axes)
    inv = tuple(np.argsort(axes))
    return _make(a.data.transpose(axes), "transpose", (a,), lambda g: (transpose(g, inv),))


def swapaxes(a, ax1: int, ax2: int) -> Tensor:
    a = as_tensor(a)
    return _make(np.swapaxes(a.data, ax1, ax2), "swapaxes", (a,),
                 lambda g: (swapaxes(g, ax1, ax2),))


def getitem(a, index) -> Tensor:
    a = as_tensor(a)
    src = a.shape
    return _make(np.array(a.data[index]), "getitem", (a,),
                 lambda g: (_scatter(g, index, src),))


def _scatter(g, index, shape) -> Tensor:
    g = as_tensor(g)
    data = np.zeros(shape)
    np.add.at(data, index, g.data)
    return _make(data, "scatter", (g,), lambda h: (getitem(h, index),))


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError as exc:
        raise ShapeMismatch(f"concat: {[t.shape for t in ts]}") from exc
    ax = axis % data.ndim
    bounds = np.cumsum([0] + [t.shape[ax] for t in ts])

    def vjp(g):
        out = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            idx = [slice(None)] * g.ndim
            idx[ax] = slice(int(lo), int(hi))
            out.append(getitem(g, tuple(idx)))
        return tuple(out)

    return _make(data, "concat", ts, vjp)


def broadcast_to(a, shape) -> Tensor:
    a = as_tensor(a)
    src = a.shape
    return _make(np.broadcast_to(a.data, shape).copy(), "broadcast_to", (a,),
                 lambda g: (_unbroadcast(g, src),))


# ---------------------------------------------------------------------------
# reductions and linear algebra


def sum_(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    src = a.shape
    data = np.asarray(a.data.sum(axis=axis, keepdims=keepdims))

    def vjp(g):
        if axis is not None and not keepdims:
            axes = (axis,) if isinstance(axis, int) else axis
            axes = sorted(ax % len(src) for ax in axes)
            shp = list(g.shape)
            for ax in axes:
                shp.insert(ax, 1)
            g = reshape(g, tuple(shp))
        elif axis is None and not keepdims:
            g = reshape(g, (1,) * len(src))
        return (broadcast_to(g, src),)

    return _make(data, "sum", (a,), vjp)


def mean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        n = a.size
    else:
        axes = (axis,) if isinstance(axis, int) else axis
        n = int(np.prod([a.shape[ax] for ax in axes]))
    return scale(sum_(a, axis, keepdims), 1.0 / n)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch("matmul requires operands with ndim >= 2")
    try:
        data = np.matmul(a.data, b.data)
    except ValueError as exc:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}") from exc

    def vjp(g):
        ga = matmul(g, swapaxes(b, -1, -2))
        gb = matmul(swapaxes(a, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _make(data, "matmul", (a, b), vjp)


def l2_norm(a, axis=-1, keepdims=False) -> Tensor:
    """Euclidean norm along ``axis`` (int or tuple).  Subgradient 0 at 0."""
    a = as_tensor(a)
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    axes = tuple(sorted(ax % a.ndim for ax in axes))
    data = np.sqrt((a.data * a.data).sum(axis=axes, keepdims=keepdims))
    holder: list[Tensor] = []

    def vjp(g):
        norm = holder[0]
        zero = (norm.data == 0).astype(np.float64)
        q = div(g, add(norm, zero))
        if not keepdims:
            shp = list(q.shape)
            for ax in axes:
                shp.insert(ax, 1)
            q = reshape(q, tuple(shp))
        return (mul(a, q),)

    out = _make(np.asarray(data), "l2_norm", (a,), vjp)
    holder.append(out)
    return out


# ---------------------------------------------------------------------------
# fused ops (first-order only)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        gd = g.data
        return (Tensor(y * (gd - (gd * y).sum(axis=axis, keepdims=True))),)

    return _make(y, "softmax", (a,), vjp, higher_order=False)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    y = z - lse

    def vjp(g):
        gd = g.data
        return (Tensor(gd - np.exp(y) * gd.sum(axis=axis, keepdims=True)),)

    return _make(y, "log_softmax", (a,), vjp, higher_order=False)


def layer_norm(a, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance (no affine)."""
    a = as_tensor(a)
    mu = a.data.mean(axis=-1, keepdims=True)
    xc = a.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = xc * inv

    def vjp(g):
        gd = g.data
        gm = gd.mean(axis=-1, keepdims=True)
        gym = (gd * y).mean(axis=-1, keepdims=True)
        return (Tensor(inv * (gd - gm - y * gym)),)

    return _make(y, "layer_norm", (a,), vjp, higher_order=False)


def dropout(a, rate: float, train: bool, rng: np.random.Generator | None = None) -> Tensor:
    a = as_tensor(a)
    if not train or rate <= 0.0:
        return a
    if rng is None:
        raise ValueError("dropout in train mode needs an rng")
    mask = (rng.random(a.shape) >= rate) / (1.0 - rate)
    return _make(a.data * mask, "dropout", (a,),
                 lambda g: (Tensor(g.data * mask),), higher_order=False)


# ---------------------------------------------------------------------------
# differentiation


def grad(tape: Tape, loss: Tensor, wrt: Iterable[Tensor],
         create_graph: bool = False) -> list[Tensor]:
    """Gradients of a scalar ``loss`` with respect to ``wrt``.

    With ``create_graph`` the backward pass is itself recorded on ``tape`` so
    the returned gradients can be differentiated again.
    """
    wrt = list(wrt)
    if loss.size != 1:
        raise NotScalarLoss(f"loss has shape {loss.shape}")
    cot: dict[int, Tensor] = {id(loss): Tensor(np.ones_like(loss.data))}
    if loss.node is not None:
        nodes = tape.nodes[: len(tape.nodes)]
        ctx = _recording(tape) if create_graph else no_record()
        with ctx:
            for node in reversed(nodes):
                g = cot.get(id(node.out))
                if g is None:
                    continue
                if create_graph and not node.higher_order:
                    raise NestedTapeUnsupported(
                        f"op '{node.op}' has no second-order rule")
                grads = node.vjp(g)
                for inp, gi in zip(node.inputs, grads):
                    if gi is None or not inp.requires_grad:
                        continue
                    prev = cot.get(id(inp))
                    cot[id(inp)] = gi if prev is None else add(prev, gi)
    out = []
    for w in wrt:
        g = cot.get(id(w))
        out.append(g if g is not None else Tensor(np.zeros_like(w.data)))
    return out


def grad_of_grad_norm(tape: Tape, d_output: Tensor, inputs: Sequence[Tensor],
                      params: Sequence[Tensor]) -> tuple[Tensor, list[Tensor]]:
    """Penalty ``mean_b (||grad_x D(x_b)||_2 - 1)^2`` and its parameter gradients.

    ``d_output`` holds one critic score per sample (leading batch axis).  When
    several inputs are given, the per-sample gradient norm is taken over their
    concatenation, which is the gradient of the summed critic.
    """
    inputs = list(inputs)
    with tape:
        total = sum_(d_output)
    gxs = grad(tape, total, inputs, create_graph=True)
    with tape:
        flat = [reshape(gx, (gx.shape[0], -1)) for gx in gxs]
        joint = flat[0] if len(flat) == 1 else concat(flat, axis=1)
        norms = l2_norm(joint, axis=-1)
        penalty = mean(square(sub(norms, 1.0)))
    pgrads = grad(tape, penalty, params)
    return penalty, pgrads
