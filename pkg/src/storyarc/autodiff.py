"""Reverse-mode automatic differentiation over dense numpy tensors.

A ``Node`` wraps one ndarray value plus a backward closure; ops build an
acyclic graph and ``backward`` runs the closures in reverse topological
order. Gradients accumulate into ``Node.grad`` (leaves keep theirs across
calls so mini-batch gradient accumulation works; intermediates are reset at
the start of every backward pass).

Finiteness policy: leaf tensors are validated on creation, and ops that can
manufacture non-finite values from finite inputs (log, exp, softmax) validate
their output. ``mask_fill`` is the sanctioned producer of -inf logits for
attention/gate masking; masked softmax turns those into exact zeros.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NonFiniteValue, NotScalarLoss, ShapeMismatch


class Node:
    __slots__ = ("value", "grad", "parents", "bwd")

    def __init__(self, value: np.ndarray, parents: tuple = (), bwd: Callable | None = None):
        self.value = value
        self.grad: np.ndarray | None = None
        self.parents = parents
        self.bwd = bwd

    @property
    def shape(self):
        return self.value.shape

    @property
    def dtype(self):
        return self.value.dtype

    def __repr__(self):
        return f"Node(shape={self.value.shape}, dtype={self.value.dtype})"


def tensor(data, dtype=None, check: bool = True) -> Node:
    """Leaf node from array-like data. Raises NonFiniteValue on NaN/Inf."""
    value = np.asarray(data, dtype=dtype)
    if check and not np.isfinite(value).all():
        raise NonFiniteValue("leaf tensor contains NaN or Inf")
    return Node(value)


def _acc(node: Node, g: np.ndarray):
    if node.grad is None:
        node.grad = g
    else:
        node.grad = node.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient over axes that were broadcast in the forward op."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a: Node, b: Node) -> Node:
    out = Node(a.value + b.value, (a, b))

    def bwd():
        _acc(a, _unbroadcast(out.grad, a.value.shape))
        _acc(b, _unbroadcast(out.grad, b.value.shape))

    out.bwd = bwd
    return out


def sub(a: Node, b: Node) -> Node:
    out = Node(a.value - b.value, (a, b))

    def bwd():
        _acc(a, _unbroadcast(out.grad, a.value.shape))
        _acc(b, _unbroadcast(-out.grad, b.value.shape))

    out.bwd = bwd
    return out


def mul(a: Node, b: Node) -> Node:
    out = Node(a.value * b.value, (a, b))

    def bwd():
        _acc(a, _unbroadcast(out.grad * b.value, a.value.shape))
        _acc(b, _unbroadcast(out.grad * a.value, b.value.shape))

    out.bwd = bwd
    return out


def scale(a: Node, s: float) -> Node:
    out = Node(a.value * a.value.dtype.type(s), (a,))

    def bwd():
        _acc(a, out.grad * a.value.dtype.type(s))

    out.bwd = bwd
    return out


def matmul(a: Node, b: Node) -> Node:
    """Matrix product for 2D@2D, 2D@1D, 1D@2D and 1D@1D operands."""
    av, bv = a.value, b.value
    if av.ndim not in (1, 2) or bv.ndim not in (1, 2):
        raise ShapeMismatch(f"matmul supports 1D/2D operands, got {av.shape} @ {bv.shape}")
    if av.shape[-1] != (bv.shape[0] if bv.ndim > 0 else 0):
        raise ShapeMismatch(f"inner dimensions differ: {av.shape} @ {bv.shape}")
    out = Node(av @ bv, (a, b))

    def bwd():
        g = out.grad
        if av.ndim == 2 and bv.ndim == 2:
            _acc(a, g @ bv.T)
            _acc(b, av.T @ g)
        elif av.ndim == 2 and bv.ndim == 1:
            _acc(a, np.outer(g, bv))
            _acc(b, av.T @ g)
        elif av.ndim == 1 and bv.ndim == 2:
            _acc(a, bv @ g)
            _acc(b, np.outer(av, g))
        else:  # 1D @ 1D
            _acc(a, g * bv)
            _acc(b, g * av)

    out.bwd = bwd
    return out


def transpose(a: Node) -> Node:
    out = Node(a.value.T, (a,))

    def bwd():
        _acc(a, out.grad.T)

    out.bwd = bwd
    return out


def concat(nodes: Sequence[Node], axis: int = 0) -> Node:
    nodes = list(nodes)
    sizes = [n.value.shape[axis] for n in nodes]
    out = Node(np.concatenate([n.value for n in nodes], axis=axis), tuple(nodes))

    def bwd():
        offset = 0
        for n, size in zip(nodes, sizes):
            idx = [slice(None)] * out.grad.ndim
            idx[axis] = slice(offset, offset + size)
            _acc(n, out.grad[tuple(idx)])
            offset += size

    out.bwd = bwd
    return out


def stack(nodes: Sequence[Node], axis: int = 0) -> Node:
    nodes = list(nodes)
    out = Node(np.stack([n.value for n in nodes], axis=axis), tuple(nodes))

    def bwd():
        for i, n in enumerate(nodes):
            _acc(n, np.take(out.grad, i, axis=axis))

    out.bwd = bwd
    return out


def narrow(a: Node, axis: int, start: int, length: int) -> Node:
    """Contiguous slice [start, start+length) along one axis."""
    idx = [slice(None)] * a.value.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    out = Node(a.value[idx], (a,))

    def bwd():
        g = np.zeros_like(a.value)
        g[idx] = out.grad
        _acc(a, g)

    out.bwd = bwd
    return out


def reshape(a: Node, shape) -> Node:
    out = Node(a.value.reshape(shape), (a,))

    def bwd():
        _acc(a, out.grad.reshape(a.value.shape))

    out.bwd = bwd
    return out


def tanh(a: Node) -> Node:
    y = np.tanh(a.value)
    out = Node(y, (a,))

    def bwd():
        _acc(a, out.grad * (1.0 - y * y))

    out.bwd = bwd
    return out


def sigmoid(a: Node) -> Node:
    x = a.value
    y = np.empty_like(x)
    pos = x >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    y[~pos] = ex / (1.0 + ex)
    out = Node(y, (a,))

    def bwd():
        _acc(a, out.grad * y * (1.0 - y))

    out.bwd = bwd
    return out


def relu(a: Node) -> Node:
    y = np.maximum(a.value, 0)
    out = Node(y, (a,))

    def bwd():
        _acc(a, out.grad * (a.value > 0))

    out.bwd = bwd
    return out


def exp(a: Node) -> Node:
    y = np.exp(a.value)
    if not np.isfinite(y).all():
        raise NonFiniteValue("exp overflowed")
    out = Node(y, (a,))

    def bwd():
        _acc(a, out.grad * y)

    out.bwd = bwd
    return out


def log(a: Node) -> Node:
    y = np.log(a.value)
    if not np.isfinite(y).all():
        raise NonFiniteValue("log of non-positive value")
    out = Node(y, (a,))

    def bwd():
        _acc(a, out.grad / a.value)

    out.bwd = bwd
    return out


def softmax(a: Node, axis: int = -1) -> Node:
    """Stable softmax. -inf entries (from mask_fill) get exactly zero weight;
    a fully masked axis is the caller's bug and raises."""
    x = a.value
    m = np.max(x, axis=axis, keepdims=True)
    if not np.isfinite(m).all():
        raise NonFiniteValue("softmax over a fully masked (all -inf) axis")
    e = np.exp(x - m)
    s = e / e.sum(axis=axis, keepdims=True)
    out = Node(s, (a,))

    def bwd():
        g = out.grad
        dot = np.sum(g * s, axis=axis, keepdims=True)
        _acc(a, s * (g - dot))

    out.bwd = bwd
    return out


def sum_(a: Node, axis=None, keepdims: bool = False) -> Node:
    out = Node(a.value.sum(axis=axis, keepdims=keepdims), (a,))

    def bwd():
        g = out.grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _acc(a, np.broadcast_to(g, a.value.shape).copy())

    out.bwd = bwd
    return out


def mean_(a: Node, axis=None, keepdims: bool = False) -> Node:
    n = a.value.size if axis is None else a.value.shape[axis]
    return scale(sum_(a, axis=axis, keepdims=keepdims), 1.0 / n)


def embedding(table: Node, ids: Sequence[int]) -> Node:
    """Row gather; backward scatter-adds into the table gradient."""
    idx = np.asarray(ids, dtype=np.intp)
    out = Node(table.value[idx], (table,))

    def bwd():
        g = np.zeros_like(table.value)
        np.add.at(g, idx, out.grad)
        _acc(table, g)

    out.bwd = bwd
    return out


def mask_fill(a: Node, mask: np.ndarray, value: float) -> Node:
    """Writes ``value`` (typically -inf) where mask is True; gradient is zero
    at masked positions."""
    mask = np.asarray(mask, dtype=bool)
    v = a.value.copy()
    v[mask] = value
    out = Node(v, (a,))

    def bwd():
        _acc(a, out.grad * ~mask)

    out.bwd = bwd
    return out


def stop_gradient(a: Node) -> Node:
    return Node(a.value, ())


def straight_through(soft: Node, hard_value: np.ndarray) -> Node:
    """Forward takes the hard (discrete) value, backward pretends the op was
    the soft relaxation."""
    if soft.value.shape != hard_value.shape:
        raise ShapeMismatch(f"straight_through shapes differ: {soft.value.shape} vs {hard_value.shape}")
    out = Node(hard_value, (soft,))

    def bwd():
        _acc(soft, out.grad)

    out.bwd = bwd
    return out


def dropout(a: Node, rate: float, training: bool, rng: np.random.Generator) -> Node:
    """Inverted dropout: kept units are scaled by 1/(1-rate). Identity when
    not training or rate == 0."""
    if not training or rate <= 0.0:
        return a
    keep = (rng.random(a.value.shape) >= rate).astype(a.value.dtype) / a.value.dtype.type(1.0 - rate)
    out = Node(a.value * keep, (a,))

    def bwd():
        _acc(a, out.grad * keep)

    out.bwd = bwd
    return out


def sparse_ce(logits: Node, target: int) -> Node:
    """-log softmax(logits)[target], computed via logsumexp for stability."""
    x = logits.value
    m = x.max()
    lse = m + np.log(np.exp(x - m).sum())
    out = Node(np.asarray(lse - x[target], dtype=x.dtype), (logits,))

    def bwd():
        p = np.exp(x - lse)
        p[target] -= 1.0
        _acc(logits, out.grad * p)

    out.bwd = bwd
    return out


def bce_with_logits(logits: Node, targets: np.ndarray) -> Node:
    """Mean elementwise binary cross-entropy against {0,1} targets."""
    z = logits.value
    y = np.asarray(targets, dtype=z.dtype)
    if z.shape != y.shape:
        raise ShapeMismatch(f"bce shapes differ: {z.shape} vs {y.shape}")
    per = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    out = Node(np.asarray(per.mean(), dtype=z.dtype), (logits,))

    def bwd():
        p = np.empty_like(z)
        pos = z >= 0
        p[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        p[~pos] = ez / (1.0 + ez)
        _acc(logits, out.grad * (p - y) / z.size)

    out.bwd = bwd
    return out


def _topo_order(root: Node) -> list[Node]:
    order: list[Node] = []
    visited: set[int] = set()
    stack: list[tuple[Node, Iterable | None]] = [(root, None)]
    while stack:
        node, it = stack.pop()
        if it is None:
            if id(node) in visited:
                continue
            visited.add(id(node))
            it = iter(node.parents)
        advanced = False
        for parent in it:
            if id(parent) not in visited:
                stack.append((node, it))
                stack.append((parent, None))
                advanced = True
                break
        if not advanced:
            order.append(node)
    return order


def backward(loss: Node, seed: float = 1.0):
    """Populate gradients of everything reachable from a scalar loss.

    ``seed`` scales the upstream gradient (used for loss normalization when
    accumulating over a batch). Leaf gradients accumulate across calls;
    intermediate gradients are reset each call.
    """
    if loss.value.ndim != 0:
        raise NotScalarLoss(f"loss must be a scalar, got shape {loss.value.shape}")
    order = _topo_order(loss)
    for node in order:
        if node.parents:
            node.grad = None
    loss.grad = np.asarray(seed, dtype=loss.value.dtype)
    for node in reversed(order):
        if node.bwd is not None and node.grad is not None:
            node.bwd()


def zero_grads(params: Iterable[Node]):
    for p in params:
        p.grad = None


def assert_finite(value: np.ndarray, what: str):
    if not np.isfinite(value).all():
        raise NonFiniteValue(f"{what} contains NaN or Inf")
