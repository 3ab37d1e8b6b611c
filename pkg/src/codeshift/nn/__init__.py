"""Minimal dense neural-network engine: tensors, ops, Adam, checkpoints."""

from .checkpoint import (
    Checkpoint,
    CheckpointError,
    CheckpointKindError,
    read_checkpoint,
    write_checkpoint,
)
from .ops import (
    ShapeError,
    add,
    affine,
    attention_pool,
    concat_last,
    cross_entropy,
    dropout,
    embedding_lookup,
    linear,
    mean,
    mul,
    reshape,
    scale,
    softmax,
    sum_axis,
    tanh,
    weighted_sum,
)
from .optim import AdamState, adam_step
from .tensor import Tensor, backward, grad_enabled, no_grad, zero_grads

__all__ = [
    "AdamState",
    "Checkpoint",
    "CheckpointError",
    "CheckpointKindError",
    "ShapeError",
    "Tensor",
    "adam_step",
    "add",
    "affine",
    "attention_pool",
    "backward",
    "concat_last",
    "cross_entropy",
    "dropout",
    "embedding_lookup",
    "grad_enabled",
    "linear",
    "mean",
    "mul",
    "no_grad",
    "read_checkpoint",
    "reshape",
    "scale",
    "softmax",
    "sum_axis",
    "tanh",
    "weighted_sum",
    "write_checkpoint",
    "zero_grads",
]
