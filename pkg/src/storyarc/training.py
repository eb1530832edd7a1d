"""Teacher-forced negative log likelihood training.

Examples are bucketed by target length into seeded, shuffled mini-batches;
gradients accumulate example by example and the loss is averaged per non-pad
target token, so the update is independent of how sequences would have been
padded. Two runs with the same config and seed produce bit-identical loss
traces.
"""

from __future__ import annotations

import copy
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ag
from .autodiff import Node
from .corpus import StoryExample, Vocabulary
from .errors import DivergedLoss, EmptyDataset, EmptyTarget, LengthMismatch
from .labels import PsychLabelSpace
from .model import ModelBundle, forward_teacher_forced, init_params, parameter_count
from .optim import AdamState, adam_step, clip_global_norm
from .rng import split_streams


@dataclass
class TrainConfig:
    emb_dim: int = 300
    hidden: int = 256
    enc_layers: int = 2
    dropout: float = 0.2
    batch: int = 8
    lr: float = 3e-4
    epochs: int = 30
    max_chars: int = 3
    context_mode: str = "independent"  # or "merged"
    gate_mode: str = "soft"            # or "hard_st"
    pmr_projection: str = "unified"    # or "per_indicator"
    seed: int = 0
    patience: int = 5
    vocab_min_count: int = 1
    grad_clip: float = 5.0

    def __post_init__(self):
        if min(self.emb_dim, self.hidden, self.enc_layers, self.batch, self.max_chars) <= 0:
            raise ValueError("dimensions, batch size and character count must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.lr < 0:
            raise ValueError("learning rate must be non-negative")
        if self.context_mode not in ("merged", "independent"):
            raise ValueError(f"unknown context mode {self.context_mode!r}")
        if self.gate_mode not in ("soft", "hard_st"):
            raise ValueError(f"unknown gate mode {self.gate_mode!r}")
        if self.pmr_projection not in ("unified", "per_indicator"):
            raise ValueError(f"unknown projection mode {self.pmr_projection!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class TrainReport:
    train_nll: list[float] = field(default_factory=list)
    val_nll: list[float | None] = field(default_factory=list)
    seconds: float = 0.0
    parameter_count: int = 0
    checkpoint_path: str | None = None
    best_epoch: int = 0


def nll_loss(logits_steps: list[Node], target_ids: list[int], pad_mask) -> Node:
    """Mean over non-pad positions of -log softmax(logits)[target]."""
    pad_mask = list(pad_mask)
    if not (len(logits_steps) == len(target_ids) == len(pad_mask)):
        raise LengthMismatch(
            f"got {len(logits_steps)} logit rows, {len(target_ids)} targets, {len(pad_mask)} mask entries")
    kept = [i for i, keep in enumerate(pad_mask) if keep]
    if not kept:
        raise EmptyTarget("every target position is padding")
    total = None
    for i in kept:
        ce = ag.sparse_ce(logits_steps[i], target_ids[i])
        total = ce if total is None else ag.add(total, ce)
    return ag.scale(total, 1.0 / len(kept))


def _example_loss_node(params, config, example, training, rng, dtype):
    """Summed (not averaged) cross-entropy over the example's target tokens."""
    logits_steps, _ = forward_teacher_forced(params, config, example,
                                             training=training, rng=rng, dtype=dtype)
    total = None
    for t, logits in enumerate(logits_steps, start=1):
        ce = ag.sparse_ce(logits, example.target_tokens[t])
        total = ce if total is None else ag.add(total, ce)
    return total, len(logits_steps)


def evaluate_nll(params, config, examples: list[StoryExample], dtype=np.float32) -> float:
    """Per-token NLL in evaluation mode (no dropout)."""
    total, tokens = 0.0, 0
    for ex in examples:
        loss, n = _example_loss_node(params, config, ex, training=False, rng=None, dtype=dtype)
        total += float(loss.value)
        tokens += n
    return total / tokens


def make_batches(examples: list[StoryExample], batch: int,
                 rng: np.random.Generator) -> list[list[int]]:
    """Length-bucketed batches in seeded shuffled order."""
    order = sorted(range(len(examples)), key=lambda i: (len(examples[i].target_tokens), i))
    groups = [order[i:i + batch] for i in range(0, len(order), batch)]
    perm = rng.permutation(len(groups))
    return [groups[i] for i in perm]


def train(config: TrainConfig, train_set: list[StoryExample],
          val_set: list[StoryExample] | None, vocab: Vocabulary,
          labels: PsychLabelSpace, out_dir=None, log_file=None,
          dtype=np.float32, pretrained: np.ndarray | None = None) -> tuple[TrainReport, ModelBundle]:
    """Optimize the model with Adam under early stopping on validation NLL.

    ``pretrained`` optionally seeds the word-embedding table (still trained).
    Returns the report and a bundle holding the best parameters (final
    parameters when no validation set is given).
    """
    if not train_set:
        raise EmptyDataset("empty training set")
    streams = split_streams(config.seed)
    params = init_params(config, len(vocab), streams["init"], dtype=dtype,
                         pretrained=pretrained)
    adam = AdamState(lr=config.lr)
    report = TrainReport(parameter_count=parameter_count(params))
    started = time.time()

    best_val = np.inf
    best_params = None
    bad_epochs = 0
    log_fh = open(log_file, "w", encoding="utf-8") if log_file else None
    try:
        for epoch in range(1, config.epochs + 1):
            epoch_started = time.time()
            epoch_total, epoch_tokens = 0.0, 0
            for batch_idx in make_batches(train_set, config.batch, streams["batching"]):
                ag.zero_grads(params.values())
                batch_tokens = sum(len(train_set[i].target_tokens) - 1 for i in batch_idx)
                for i in batch_idx:
                    loss, _ = _example_loss_node(params, config, train_set[i],
                                                 training=True, rng=streams["dropout"], dtype=dtype)
                    ag.backward(loss, seed=1.0 / batch_tokens)
                    value = float(loss.value)
                    if not np.isfinite(value):
                        raise DivergedLoss(f"loss became non-finite in epoch {epoch}")
                    epoch_total += value
                    epoch_tokens += len(train_set[i].target_tokens) - 1
                clip_global_norm(params, config.grad_clip)
                adam_step(params, adam)
            train_nll = epoch_total / epoch_tokens
            val_nll = evaluate_nll(params, config, val_set, dtype) if val_set else None
            report.train_nll.append(train_nll)
            report.val_nll.append(val_nll)
            if log_fh:
                log_fh.write(json.dumps({
                    "epoch": epoch, "train_nll": train_nll, "val_nll": val_nll,
                    "seconds": time.time() - epoch_started,
                }) + "\n")
                log_fh.flush()

            if val_set:
                if val_nll < best_val:
                    best_val = val_nll
                    best_params = {k: p.value.copy() for k, p in params.items()}
                    report.best_epoch = epoch
                    bad_epochs = 0
                else:
                    bad_epochs += 1
                    if bad_epochs >= config.patience:
                        break
            else:
                report.best_epoch = epoch
    finally:
        if log_fh:
            log_fh.close()

    if best_params is not None:
        for k, p in params.items():
            p.value = best_params[k]
    report.seconds = time.time() - started

    bundle = ModelBundle(params=params, config=config, vocab=vocab, labels=labels)
    if out_dir is not None:
        from .checkpoint import save_checkpoint
        from pathlib import Path
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "model.ckpt"
        save_checkpoint(bundle, path)
        report.checkpoint_path = str(path)
    return report, bundle


# ---------------------------------------------------------------------------
# Gradient verification

MICRO_VOCAB_SIZE = 12


def micro_config(**overrides) -> TrainConfig:
    """The standard verification model: vocab 12, embeddings 8, hidden 8,
    2 real characters (plus one padding slot, so gate masking is exercised),
    single-layer encoders -- small enough for exhaustive finite differencing."""
    base = dict(emb_dim=8, hidden=8, enc_layers=1, dropout=0.0, batch=2,
                lr=1e-3, epochs=1, max_chars=3, context_mode="independent",
                gate_mode="soft", seed=7)
    base.update(overrides)
    return TrainConfig(**base)


def synthetic_example(config: TrainConfig, seed: int = 99,
                      context_len: int = 3, input_len: int = 4,
                      target_len: int = 4) -> tuple[int, StoryExample]:
    """A random but reproducible example for gradient checks: token ids drawn
    from the micro vocabulary, random scores for max_chars-1 real characters
    plus one padding slot."""
    from .corpus import CharArcScores
    from .labels import N_MASLOW, N_PLUTCHIK, N_REISS

    rng = np.random.default_rng(seed)
    def draw(n):
        return rng.integers(4, MICRO_VOCAB_SIZE, size=n).tolist()

    scores = []
    for i in range(config.max_chars - 1):
        scores.append(CharArcScores(
            f"char{i}",
            rng.random(N_PLUTCHIK),
            (rng.random(N_MASLOW) > 0.5).astype(float),
            (rng.random(N_REISS) > 0.5).astype(float),
        ))
    scores.append(CharArcScores.padding())
    example = StoryExample(
        story_id="synthetic",
        context_tokens=draw(context_len),
        input_tokens=draw(input_len),
        target_tokens=[Vocabulary.START] + draw(target_len) + [Vocabulary.END],
        char_scores=scores,
    )
    return MICRO_VOCAB_SIZE, example


def gradient_check(config: TrainConfig, example: StoryExample, vocab_size: int,
                   h: float = 1e-5, sample: int | None = None,
                   seed: int | None = None) -> dict:
    """Compare every parameter's analytic gradient against central finite
    differences on a freshly initialized 64-bit model.

    ``sample`` limits the check to that many randomly chosen elements per
    tensor (None = every element). Returns per-tensor and overall maxima of
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
    """
    streams = split_streams(config.seed if seed is None else seed)
    params = init_params(config, vocab_size, streams["init"], dtype=np.float64)

    def loss_value() -> float:
        loss, _ = _example_loss_node(params, config, example, training=False, rng=None,
                                     dtype=np.float64)
        return float(loss.value)

    ag.zero_grads(params.values())
    loss, _ = _example_loss_node(params, config, example, training=False, rng=None,
                                 dtype=np.float64)
    ag.backward(loss)
    analytic = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.value))
                for name, p in params.items()}

    picker = np.random.default_rng(12345)
    per_tensor: dict[str, float] = {}
    worst = 0.0
    for name, p in params.items():
        flat = p.value.reshape(-1)
        n = flat.size
        indices = range(n) if sample is None or sample >= n else \
            sorted(picker.choice(n, size=sample, replace=False).tolist())
        tensor_worst = 0.0
        for idx in indices:
            original = flat[idx]
            flat[idx] = original + h
            plus = loss_value()
            flat[idx] = original - h
            minus = loss_value()
            flat[idx] = original
            numeric = (plus - minus) / (2 * h)
            a = analytic[name].reshape(-1)[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            tensor_worst = max(tensor_worst, rel)
        per_tensor[name] = tensor_worst
        worst = max(worst, tensor_worst)
    return {"per_tensor": per_tensor, "max_relative_error": worst}
