"""Adam optimizer with bias correction, plus global-norm gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Node
from .errors import NonFiniteValue, ShapeMismatch


@dataclass
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, Node], state: AdamState):
    """One in-place Adam update over every parameter with a gradient.

    Parameters without a gradient this step (grad is None) are skipped;
    a zero gradient still advances the moments.
    """
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for name, p in params.items():
        if p.grad is None:
            continue
        g = p.grad
        if g.shape != p.value.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} != parameter shape {p.value.shape} for {name}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p.value)
            state.v[name] = np.zeros_like(p.value)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        if not np.isfinite(update).all():
            raise NonFiniteValue(f"non-finite Adam update for {name}")
        p.value = p.value - update.astype(p.value.dtype)


def clip_global_norm(params: dict[str, Node], max_norm: float) -> float:
    """Rescale all gradients so their joint L2 norm is at most max_norm.
    Returns the pre-clip norm."""
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float((p.grad.astype(np.float64) ** 2).sum())
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0:
        factor = max_norm / norm
        for p in params.values():
            if p.grad is not None:
                p.grad = p.grad * p.grad.dtype.type(factor)
    return norm
