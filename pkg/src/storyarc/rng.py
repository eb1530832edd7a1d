"""Seeded random streams.

One root seed is split into four independent child streams via SeedSequence
spawning, in a fixed order: init, dropout, batching, sampling. Consuming one
stream never perturbs another, so e.g. toggling dropout cannot change the
batch order.
"""

from __future__ import annotations

import numpy as np

STREAM_NAMES = ("init", "dropout", "batching", "sampling")


def split_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children)}


def stream(seed: int, name: str) -> np.random.Generator:
    return split_streams(seed)[name]
