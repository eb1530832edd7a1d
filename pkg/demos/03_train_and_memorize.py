"""Train a small model until it memorizes the toy corpus, then check greedy
reconstruction of the training sentences.

Run: python3 demos/03_train_and_memorize.py   (about a minute)
"""

import tempfile
from pathlib import Path

from toy_corpus import write_corpus

from storyarc import TrainConfig, build_vocab, default_label_space, make_examples, parse_corpus, train
from storyarc.generation import generate_sentence

labels = default_label_space()
with tempfile.TemporaryDirectory() as td:
    stories = parse_corpus(write_corpus(Path(td) / "toy.jsonl"), labels)
vocab = build_vocab(stories)
examples = [ex for story in stories for ex in make_examples(story, labels, vocab)]

config = TrainConfig(emb_dim=32, hidden=48, enc_layers=1, dropout=0.0, batch=8,
                     lr=1e-2, epochs=100, context_mode="independent", seed=1)
print(f"training on {len(examples)} pairs, vocab {len(vocab)} ...")
report, bundle = train(config, examples, None, vocab, labels)
for epoch in (1, 10, 25, 50, 100):
    print(f"  epoch {epoch:3d}: train NLL/token {report.train_nll[epoch - 1]:.3f}")
print(f"({report.parameter_count} parameters, {report.seconds:.0f}s)")

matched = total = 0
for ex in examples:
    out_ids, _ = generate_sentence(bundle, ex.context_tokens, ex.input_tokens,
                                   ex.char_scores, decode="greedy")
    target = ex.target_tokens[1:]
    matched += sum(int(i < len(out_ids) and out_ids[i] == t) for i, t in enumerate(target))
    total += len(target)
print(f"greedy reconstruction of training targets: {matched}/{total} tokens "
      f"({matched / total:.1%})")

ex = examples[2]
out_ids, trace = generate_sentence(bundle, ex.context_tokens, ex.input_tokens,
                                   ex.char_scores, decode="greedy")
print("\ninput:    ", " ".join(vocab.decode(ex.input_tokens)))
print("generated:", " ".join(vocab.decode_text(out_ids)))
print("target:   ", " ".join(vocab.decode_text(ex.target_tokens)))
print("character gate at each step:",
      [f"{step.token}:{step.char_gate.argmax()}" for step in trace.steps])
