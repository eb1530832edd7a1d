import json

import numpy as np
import pytest

from storyarc.corpus import build_vocab, make_examples, parse_corpus
from storyarc.labels import default_label_space
from storyarc.model import init_params
from storyarc.rng import split_streams
from storyarc.training import TrainConfig, micro_config


def story_record(story_id, sentences, characters, annotations):
    """annotations: list of (sentence 1-based, character, worker plutchik sets,
    maslow labels, reiss labels)."""
    return {
        "story_id": story_id,
        "sentences": sentences,
        "characters": characters,
        "annotations": [
            {"sentence": s, "character": c, "workers_plutchik": w, "maslow": m, "reiss": r}
            for (s, c, w, m, r) in annotations
        ],
    }


SUBJECTS = ["tom", "anna", "ben", "kate", "max", "lily", "sam", "ruth", "jake", "mia"]
OBJECTS = ["ball", "book", "kite", "coin", "shell", "ring", "drum", "map", "rope", "lamp"]
FRIENDS = ["dad", "mom", "leo", "zoe", "gus", "ivy", "ned", "fay", "rex", "una"]
MOODS = [("joy", "glad"), ("sadness", "sad"), ("fear", "afraid"), ("surprise", "amazed"),
         ("anger", "angry"), ("trust", "calm"), ("anticipation", "eager"), ("joy", "happy"),
         ("disgust", "upset"), ("surprise", "shocked")]


def build_toy_corpus(n_stories=10):
    """Small deterministic annotated corpus with memorizable sentences."""
    labels = default_label_space()
    records = []
    for i in range(n_stories):
        s, obj, friend = SUBJECTS[i], OBJECTS[i], FRIENDS[i]
        emotion, adj = MOODS[i]
        sentences = [
            f"{s} found a {obj} .",
            f"{s} was very {adj} .",
            f"{s} showed the {obj} to {friend} .",
            f"{friend} smiled at {s} .",
            f"{s} kept the {obj} at home .",
        ]
        maslow = labels.maslow_labels[i % 5]
        reiss = labels.reiss_labels[i % 19]
        annotations = []
        for k in range(1, 6):
            annotations.append((k, s, [[emotion], [emotion], [emotion]], [maslow], [reiss]))
            if k >= 3:
                annotations.append((k, friend, [["joy"], ["joy"]], [maslow], []))
        records.append(story_record(f"story{i}", sentences, [s, friend], annotations))
    return records


def write_corpus(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


@pytest.fixture(scope="session")
def labels():
    return default_label_space()


@pytest.fixture(scope="session")
def toy_corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "toy.jsonl"
    return write_corpus(build_toy_corpus(10), path)


@pytest.fixture(scope="session")
def toy_corpus(toy_corpus_path, labels):
    return parse_corpus(toy_corpus_path, labels)


@pytest.fixture(scope="session")
def toy_vocab(toy_corpus):
    return build_vocab(toy_corpus, min_count=1)


@pytest.fixture(scope="session")
def toy_examples(toy_corpus, toy_vocab, labels):
    examples = []
    for story in toy_corpus:
        examples.extend(make_examples(story, labels, toy_vocab))
    return examples


def tiny_bundle_config(**overrides):
    base = dict(emb_dim=12, hidden=12, enc_layers=1, dropout=0.0, batch=4,
                lr=1e-3, epochs=1, max_chars=3, context_mode="independent", seed=3)
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="session")
def tiny_bundle(toy_vocab, labels):
    """Untrained but fully wired model over the toy vocabulary."""
    from storyarc.model import ModelBundle
    config = tiny_bundle_config()
    params = init_params(config, len(toy_vocab), split_streams(config.seed)["init"])
    return ModelBundle(params=params, config=config, vocab=toy_vocab, labels=labels)


@pytest.fixture()
def micro():
    config = micro_config()
    from storyarc.training import synthetic_example
    vocab_size, example = synthetic_example(config)
    return config, vocab_size, example
