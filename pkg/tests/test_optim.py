import numpy as np

from storyarc.autodiff import Node
from storyarc.optim import AdamState, adam_step, clip_global_norm


def test_zero_gradient_leaves_params_unchanged():
    p = Node(np.array([1.0, -2.0]))
    p.grad = np.zeros(2)
    adam_step({"p": p}, AdamState(lr=0.1))
    assert np.array_equal(p.value, [1.0, -2.0])


def test_single_step_matches_closed_form():
    lr, b1, b2, eps = 3e-4, 0.9, 0.999, 1e-8
    p = Node(np.array([0.5]))
    p.grad = np.array([1.0])
    adam_step({"p": p}, AdamState(lr=lr, beta1=b1, beta2=b2, epsilon=eps))
    # bias-corrected first step: m_hat = g, v_hat = g^2
    expected = 0.5 - lr * 1.0 / (np.sqrt(1.0) + eps)
    assert abs(p.value[0] - expected) < 1e-9


def test_missing_gradient_is_skipped():
    p = Node(np.array([1.0]))
    q = Node(np.array([2.0]))
    q.grad = np.array([1.0])
    state = AdamState(lr=0.1)
    adam_step({"p": p, "q": q}, state)
    assert p.value[0] == 1.0
    assert q.value[0] != 2.0


def test_two_runs_same_updates_are_bit_identical():
    def run():
        p = Node(np.array([0.25, -0.75], dtype=np.float32))
        state = AdamState(lr=1e-2)
        for step in range(5):
            p.grad = (p.value * 0.5 + step).astype(np.float32)
            adam_step({"p": p}, state)
        return p.value

    a, b = run(), run()
    assert np.array_equal(a, b)


def test_clip_global_norm():
    p = Node(np.zeros(3))
    p.grad = np.array([3.0, 4.0, 0.0])  # norm 5
    norm = clip_global_norm({"p": p}, 1.0)
    assert abs(norm - 5.0) < 1e-12
    assert abs(np.linalg.norm(p.grad) - 1.0) < 1e-9
    # already within bound: untouched
    q = Node(np.zeros(2))
    q.grad = np.array([0.1, 0.2])
    before = q.grad.copy()
    clip_global_norm({"q": q}, 5.0)
    assert np.array_equal(q.grad, before)
