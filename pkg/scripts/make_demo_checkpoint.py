#!/usr/bin/env python3
"""Build a small untrained checkpoint over the demo corpus vocabulary.

Used by the arc-console integration tests and handy for trying the service
without a training run:

    python3 scripts/make_demo_checkpoint.py /tmp/demo.ckpt
    storyarc serve --ckpt /tmp/demo.ckpt --port 8765
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "demos"))
from toy_corpus import write_corpus  # noqa: E402

from storyarc import build_vocab, default_label_space, parse_corpus  # noqa: E402
from storyarc.checkpoint import save_checkpoint  # noqa: E402
from storyarc.model import ModelBundle, init_params  # noqa: E402
from storyarc.rng import split_streams  # noqa: E402
from storyarc.training import TrainConfig  # noqa: E402


def main(out_path: str) -> int:
    labels = default_label_space()
    with tempfile.TemporaryDirectory() as td:
        stories = parse_corpus(write_corpus(Path(td) / "toy.jsonl"), labels)
    vocab = build_vocab(stories)
    config = TrainConfig(emb_dim=16, hidden=16, enc_layers=1, dropout=0.0,
                         batch=4, lr=1e-3, epochs=1, seed=0)
    params = init_params(config, len(vocab), split_streams(config.seed)["init"])
    save_checkpoint(ModelBundle(params, config, vocab, labels), out_path)
    print(out_path)
    return 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: make_demo_checkpoint.py OUT_PATH", file=sys.stderr)
        raise SystemExit(1)
    raise SystemExit(main(sys.argv[1]))
