"""The tensor engine: building graphs, reverse-mode gradients, a finite
difference spot-check, and a few Adam steps on a toy least-squares problem.

Run: python3 demos/02_autodiff_engine.py
"""

import numpy as np

from storyarc import autodiff as ag
from storyarc.optim import AdamState, adam_step

# A small graph: loss = sum(tanh(W @ x) * y)
rng = np.random.default_rng(0)
W = ag.tensor(rng.standard_normal((3, 4)))
x = ag.tensor(rng.standard_normal(4))
y = ag.tensor(rng.standard_normal(3))
loss = ag.sum_(ag.mul(ag.tanh(ag.matmul(W, x)), y))
ag.backward(loss)
print("loss:", float(loss.value))
print("dloss/dW row 0:", W.grad[0])

# Finite-difference spot check on one entry of W
h = 1e-6
idx = (1, 2)
orig = W.value[idx]
W.value[idx] = orig + h
plus = float(ag.sum_(ag.mul(ag.tanh(ag.matmul(W, x)), y)).value)
W.value[idx] = orig - h
minus = float(ag.sum_(ag.mul(ag.tanh(ag.matmul(W, x)), y)).value)
W.value[idx] = orig
numeric = (plus - minus) / (2 * h)
print(f"analytic {W.grad[idx]:.8f} vs numeric {numeric:.8f}")

# Masked softmax: -inf entries get exactly zero probability
logits = ag.tensor([1.0, 2.0, 3.0])
masked = ag.mask_fill(logits, np.array([False, True, False]), -np.inf)
print("masked softmax:", ag.softmax(masked).value)

# Adam on min ||A p - b||^2
A = rng.standard_normal((6, 2))
b = A @ np.array([0.5, -1.5])
p = ag.Node(np.zeros(2))
state = AdamState(lr=0.2)
for step in range(200):
    ag.zero_grads([p])
    residual = ag.sub(ag.matmul(ag.tensor(A), p), ag.tensor(b))
    ag.backward(ag.sum_(ag.mul(residual, residual)))
    adam_step({"p": p}, state)
print("recovered parameters:", p.value, "(target [0.5, -1.5])")
