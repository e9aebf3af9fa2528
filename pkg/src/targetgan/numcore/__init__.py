"""Dense tensors, reverse-mode differentiation and the Adam optimizer."""

from .adam import AdamState, adam_step
from .serialize import CorruptTensor, read_tensor, write_tensor
from .tensor import (
    NestedTapeUnsupported,
    NonFiniteValue,
    NotScalarLoss,
    NumcoreError,
    ShapeMismatch,
    Tape,
    Tensor,
    add,
    as_tensor,
    broadcast_to,
    concat,
    div,
    dropout,
    exp,
    getitem,
    grad,
    grad_of_grad_norm,
    l2_norm,
    layer_norm,
    log,
    log_softmax,
    matmul,
    mean,
    mul,
    neg,
    no_record,
    power,
    relu,
    reshape,
    scale,
    softmax,
    sqrt,
    square,
    sub,
    sum_,
    swapaxes,
    tanh,
    transpose,
)

__all__ = [name for name in dir() if not name.startswith("_")]
