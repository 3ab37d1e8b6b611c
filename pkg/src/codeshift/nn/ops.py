"""Forward ops with hand-written backward rules.

Everything the two task models need: affine maps, embedding lookup, tanh,
stable softmax (optionally masked), inverted dropout, attention pooling,
cross-entropy, and the small glue ops (add/mul/concat/sum/mean/reshape)
they are composed from. Shapes broadcast over leading batch dimensions;
reductions and softmax act on the last axis unless stated otherwise.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, accumulate, make_node


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape` after numpy broadcasting."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data

    def backward_fn(g):
        accumulate(a, _unbroadcast(g, a.data.shape))
        accumulate(b, _unbroadcast(g, b.data.shape))

    return make_node(out, (a, b), backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data

    def backward_fn(g):
        accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return make_node(out, (a, b), backward_fn)


def scale(a: Tensor, c: float) -> Tensor:
    out = a.data * c

    def backward_fn(g):
        accumulate(a, g * c)

    return make_node(out, (a,), backward_fn)


def linear(x: Tensor, w: Tensor) -> Tensor:
    """x (..., k) @ w (k, m) -> (..., m)."""
    if x.data.shape[-1] != w.data.shape[0]:
        raise ShapeError(f"linear: {x.data.shape} @ {w.data.shape}")
    out = x.data @ w.data

    def backward_fn(g):
        accumulate(x, g @ w.data.T)
        k, m = w.data.shape
        accumulate(w, x.data.reshape(-1, k).T @ g.reshape(-1, m))

    return make_node(out, (x, w), backward_fn)


def affine(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b with b broadcast over leading dims."""
    if b.data.shape != (w.data.shape[1],):
        raise ShapeError(f"affine: bias {b.data.shape} vs weight {w.data.shape}")
    return add(linear(x, w), b)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward_fn(g):
        accumulate(x, g * (1.0 - out * out))

    return make_node(out, (x,), backward_fn)


def softmax(x: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Row-stable softmax over the last axis.

    `mask` (same shape, boolean) pins masked positions to probability zero;
    each row must keep at least one unmasked entry.
    """
    z = x.data
    if mask is not None:
        if mask.shape != z.shape:
            raise ShapeError(f"softmax mask {mask.shape} vs input {z.shape}")
        if not mask.any(axis=-1).all():
            raise ValueError("softmax: a row is fully masked")
        z = np.where(mask, z, -np.inf)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward_fn(g):
        inner = (g * out).sum(axis=-1, keepdims=True)
        accumulate(x, out * (g - inner))

    return make_node(out, (x,), backward_fn)


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of `table` (V, d); output shape ids.shape + (d,)."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise IndexError(f"embedding id out of range [0, {table.data.shape[0]})")
    out = table.data[ids]

    def backward_fn(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, table.data.shape[1]))
        accumulate(table, gt)

    return make_node(out, (table,), backward_fn)


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: survivors scaled by 1/(1-p) so inference is identity."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs an rng")
    keep = (rng.random(x.data.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    out = x.data * keep

    def backward_fn(g):
        accumulate(x, g * keep)

    return make_node(out, (x,), backward_fn)


def weighted_sum(weights: Tensor, values: Tensor) -> Tensor:
    """sum_n weights[..., n] * values[..., n, d] -> (..., d)."""
    if weights.data.shape != values.data.shape[:-1]:
        raise ShapeError(f"weighted_sum: {weights.data.shape} vs {values.data.shape}")
    out = (weights.data[..., None] * values.data).sum(axis=-2)

    def backward_fn(g):
        accumulate(weights, (values.data * g[..., None, :]).sum(axis=-1))
        accumulate(values, weights.data[..., None] * g[..., None, :])

    return make_node(out, (weights, values), backward_fn)


def attention_pool(contexts: Tensor, a: Tensor, mask: np.ndarray | None = None) -> tuple[Tensor, Tensor]:
    """Soft attention over rows: weights = softmax(contexts @ a), pooled = weights^T contexts.

    contexts (..., n, d), a (d,). Returns (pooled (..., d), weights (..., n)).
    """
    scores = linear(contexts, reshape(a, (a.data.shape[0], 1)))
    scores = reshape(scores, scores.data.shape[:-1])
    weights = softmax(scores, mask=mask)
    pooled = weighted_sum(weights, contexts)
    return pooled, weights


def concat_last(parts: list[Tensor]) -> Tensor:
    """Concatenate along the last axis."""
    out = np.concatenate([p.data for p in parts], axis=-1)
    sizes = [p.data.shape[-1] for p in parts]

    def backward_fn(g):
        offset = 0
        for p, n in zip(parts, sizes):
            accumulate(p, g[..., offset:offset + n])
            offset += n

    return make_node(out, tuple(parts), backward_fn)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = x.data.reshape(shape)

    def backward_fn(g):
        accumulate(x, g.reshape(x.data.shape))

    return make_node(out, (x,), backward_fn)


def sum_axis(x: Tensor, axis: int) -> Tensor:
    out = x.data.sum(axis=axis)

    def backward_fn(g):
        accumulate(x, np.broadcast_to(np.expand_dims(g, axis), x.data.shape).copy())

    return make_node(out, (x,), backward_fn)


def mean(x: Tensor) -> Tensor:
    """Scalar mean over all elements."""
    out = np.asarray(x.data.mean())
    n = x.data.size

    def backward_fn(g):
        accumulate(x, np.broadcast_to(g / n, x.data.shape).astype(x.data.dtype))

    return make_node(out, (x,), backward_fn)


def cross_entropy(probs: Tensor, labels: np.ndarray) -> Tensor:
    """Per-sample -log probs[label]; probs (..., C), labels (...) ints.

    Probabilities are clipped at the dtype's tiny value before the log so a
    saturated softmax cannot produce inf.
    """
    labels = np.asarray(labels)
    if labels.shape != probs.data.shape[:-1]:
        raise ShapeError(f"cross_entropy: labels {labels.shape} vs probs {probs.data.shape}")
    n_classes = probs.data.shape[-1]
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise IndexError(f"label out of range [0, {n_classes})")
    tiny = np.finfo(probs.data.dtype).tiny
    picked = np.take_along_axis(probs.data, labels[..., None], axis=-1)[..., 0]
    clipped = np.maximum(picked, tiny)
    out = -np.log(clipped)

    def backward_fn(g):
        gp = np.zeros_like(probs.data)
        live = (picked >= tiny).astype(probs.data.dtype)  # zero slope in the clip region
        np.put_along_axis(gp, labels[..., None], (-g * live / clipped)[..., None], axis=-1)
        accumulate(probs, gp)

    return make_node(out, (probs,), backward_fn)
