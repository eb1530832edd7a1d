"""Corpus pipeline walkthrough: parsing, score aggregation, vocabulary,
training pairs and the train/test split.

Run: python3 demos/01_corpus_pipeline.py
"""

import tempfile
from pathlib import Path

from toy_corpus import write_corpus

from storyarc import (
    aggregate_plutchik,
    build_vocab,
    cap_characters,
    default_label_space,
    encode_needs,
    make_examples,
    parse_corpus,
    split_examples,
)
from storyarc.corpus import character_count_histogram

labels = default_label_space()

with tempfile.TemporaryDirectory() as td:
    path = write_corpus(Path(td) / "toy.jsonl")
    stories = parse_corpus(path, labels)

print(f"parsed {len(stories)} stories; first: {stories[0].story_id}")
print("sentences:", *stories[0].sentences, sep="\n  ")

# Worker aggregation: a state needs at least 2 of 3 workers, score = count/3.
scores = aggregate_plutchik([["joy", "fear"], ["joy"], ["joy"]], labels)
print("\naggregated emotions (joy by 3 workers, fear by 1):")
for name, value in zip(labels.plutchik_labels, scores):
    if value:
        print(f"  {name}: {value:.3f}")
print("  (fear was filtered: only one worker marked it)")

maslow, reiss = encode_needs(["love"], ["contact", "romance"], labels)
print(f"\nneed vector nonzeros: {maslow.nonzero()[0].tolist()},",
      f"motive vector nonzeros: {reiss.nonzero()[0].tolist()}")

print("\ncharacter capping:", stories[0].characters, "->", cap_characters(stories[0]))
print("per-sentence character histogram:", character_count_histogram(stories))

vocab = build_vocab(stories, min_count=1)
print(f"\nvocabulary: {len(vocab)} entries (4 specials + tokens)")

examples = [ex for story in stories for ex in make_examples(story, labels, vocab)]
print(f"{len(examples)} training pairs ({len(examples) // len(stories)} per story)")
ex = examples[1]
print("example 2 of story0:")
print("  context:", vocab.decode(ex.context_tokens))
print("  input:  ", vocab.decode(ex.input_tokens))
print("  target: ", vocab.decode(ex.target_tokens))
print("  scored characters:", [cs.character for cs in ex.char_scores])

train_set, test_set = split_examples(examples, ratio=0.8, seed=0)
print(f"\nsplit at story granularity: {len(train_set)} train / {len(test_set)} test examples")
