import json
from collections import Counter

import numpy as np
import pytest

from storyarc.corpus import (
    CharArcScores,
    RawStory,
    aggregate_plutchik,
    augment_corpus,
    build_vocab,
    cap_characters,
    character_count_histogram,
    detokenize,
    encode_needs,
    example_from_record,
    example_to_record,
    make_examples,
    parse_corpus,
    split_examples,
    tokenize,
)
from storyarc.errors import (
    ClassifierUnavailable,
    EmptyCorpus,
    MalformedRecord,
    UnknownLabel,
    WrongSentenceCount,
)
from storyarc.labels import PADDING_CHARACTER

from conftest import build_toy_corpus, story_record, write_corpus


def one_story(**overrides):
    rec = story_record(
        "s1",
        ["Jervis has been single for a long time.",
         "He wants to have a girlfriend.",
         "One day he meets a nice girl at the grocery store.",
         "They begin to date.",
         "Jervis is happy that he is no longer single."],
        ["Jervis", "Girlfriend"],
        [(1, "Jervis", [["sadness"], ["sadness"], ["anticipation"]], ["love"], ["contact", "romance"]),
         (3, "Girlfriend", [["joy"], ["joy"], []], ["love"], ["romance"]),
         (5, "Jervis", [["joy"], ["joy"], ["joy"]], ["love"], ["contact"])],
    )
    rec.update(overrides)
    return rec


def test_parse_well_formed(tmp_path, labels):
    path = write_corpus([one_story()], tmp_path / "c.jsonl")
    stories = parse_corpus(path, labels)
    assert len(stories) == 1
    assert stories[0].story_id == "s1"
    assert len(stories[0].sentences) == 5
    assert (1, "Jervis") in stories[0].annotations


def test_parse_wrong_sentence_count(tmp_path, labels):
    rec = one_story()
    rec["sentences"] = rec["sentences"][:4]
    path = write_corpus([rec], tmp_path / "c.jsonl")
    with pytest.raises(WrongSentenceCount):
        parse_corpus(path, labels)


def test_parse_malformed_json_reports_line(tmp_path, labels):
    path = tmp_path / "c.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps(one_story()) + "\n")
        fh.write("{not json\n")
    with pytest.raises(MalformedRecord) as exc:
        parse_corpus(path, labels)
    assert exc.value.line == 2


def test_parse_rejects_undeclared_character(tmp_path, labels):
    rec = one_story()
    rec["annotations"][0]["character"] = "Stranger"
    path = write_corpus([rec], tmp_path / "c.jsonl")
    with pytest.raises(MalformedRecord):
        parse_corpus(path, labels)


def test_parse_unknown_label(tmp_path, labels):
    rec = one_story()
    rec["annotations"][0]["workers_plutchik"] = [["bliss"]]
    path = write_corpus([rec], tmp_path / "c.jsonl")
    with pytest.raises(UnknownLabel):
        parse_corpus(path, labels)


def test_histogram_counts_annotated_characters_per_sentence(tmp_path, labels):
    path = write_corpus(build_toy_corpus(6), tmp_path / "c.jsonl")
    stories = parse_corpus(path, labels)
    hist = character_count_histogram(stories)
    # independent brute-force count
    expected = Counter()
    for story in stories:
        rows = Counter(sent for (sent, _c) in story.annotations)
        expected.update(Counter(rows.values()))
    assert hist == dict(expected)
    # the weighted histogram sum equals total annotation rows
    assert sum(n * c for n, c in hist.items()) == sum(len(s.annotations) for s in stories)


def test_aggregate_majority_rule(labels):
    scores = aggregate_plutchik([["joy"], ["joy", "trust"], ["joy"]], labels)
    assert scores[labels.plutchik_index("joy")] == 1.0
    assert scores.sum() == 1.0  # trust marked once: filtered out


def test_aggregate_empty_workers(labels):
    assert aggregate_plutchik([], labels).sum() == 0.0


def test_aggregate_two_of_three(labels):
    scores = aggregate_plutchik([["joy", "sadness"], ["joy"], ["sadness"]], labels)
    assert scores[labels.plutchik_index("joy")] == pytest.approx(2 / 3)
    assert scores[labels.plutchik_index("sadness")] == pytest.approx(2 / 3)
    assert np.count_nonzero(scores) == 2


def test_aggregate_scores_live_on_the_grid(labels):
    rng = np.random.default_rng(5)
    names = list(labels.plutchik_labels)
    for _ in range(50):
        workers = [[n for n in names if rng.random() < 0.3] for _ in range(3)]
        scores = aggregate_plutchik(workers, labels)
        for v in scores:
            assert v in (0.0, 2 / 3, 1.0)


def test_encode_needs(labels):
    maslow, reiss = encode_needs(["love"], ["contact", "romance"], labels)
    assert maslow[labels.maslow_index("love")] == 1.0 and maslow.sum() == 1.0
    assert reiss[labels.reiss_index("contact")] == 1.0
    assert reiss[labels.reiss_index("romance")] == 1.0 and reiss.sum() == 2.0


def test_encode_needs_empty_and_multihot(labels):
    maslow, reiss = encode_needs([], [], labels)
    assert maslow.sum() == 0 and reiss.sum() == 0
    maslow, _ = encode_needs(["esteem", "love"], [], labels)
    assert maslow.sum() == 2.0


def test_cap_pads_missing_characters(tmp_path, labels):
    path = write_corpus([one_story()], tmp_path / "c.jsonl")
    story = parse_corpus(path, labels)[0]
    assert cap_characters(story) == ["Jervis", "Girlfriend", PADDING_CHARACTER]


def test_cap_keeps_most_annotated():
    story = RawStory("x", ["a"] * 5, ["p", "q", "r", "s"], {})
    counts = {"p": 5, "q": 4, "r": 2, "s": 1}
    annotations = {}
    for char, n in counts.items():
        for sent in range(1, n + 1):
            annotations[(sent, char)] = None
    story.annotations = {k: v for k, v in annotations.items()}
    assert cap_characters(story) == ["p", "q", "r"]


def test_cap_zero_characters_pads_fully():
    story = RawStory("x", ["a"] * 5, [], {})
    assert cap_characters(story) == [PADDING_CHARACTER] * 3


def test_cap_is_idempotent(toy_corpus):
    for story in toy_corpus:
        capped = cap_characters(story)
        recapped = cap_characters(
            RawStory(story.story_id, story.sentences,
                     [c for c in capped if c != PADDING_CHARACTER],
                     story.annotations))
        assert recapped == capped


def test_vocab_counts_specials():
    story = RawStory("v", ["Jane bought a necklace ."] * 5, ["Jane"], {})
    vocab = build_vocab([story], min_count=1)
    assert len(vocab) == 5 + 4
    assert vocab.id_to_token[:4] == list(vocab.SPECIALS)


def test_vocab_min_count_maps_to_unknown():
    story = RawStory("v", ["aa bb", "cc dd", "ee ff", "gg hh", "ii jj"], ["x"], {})
    vocab = build_vocab([story], min_count=2)
    assert len(vocab) == 4  # nothing survives
    assert vocab.encode(["aa"]) == [vocab.UNK]


def test_vocab_matches_bruteforce_frequency_scan(toy_corpus):
    vocab = build_vocab(toy_corpus, min_count=2)
    counts = Counter()
    for story in toy_corpus:
        for sentence in story.sentences:
            counts.update(tokenize(sentence))
    expected = sum(1 for c in counts.values() if c >= 2)
    assert len(vocab) == expected + 4


def test_vocab_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_vocab([])


def test_examples_four_per_story(toy_corpus, toy_vocab, labels):
    story = toy_corpus[0]
    examples = make_examples(story, labels, toy_vocab)
    assert len(examples) == 4
    assert examples[0].context_tokens == []
    assert examples[1].context_tokens == examples[0].input_tokens
    for ex in examples:
        assert len(ex.char_scores) == 3
        assert ex.target_tokens[0] == toy_vocab.START
        assert ex.target_tokens[-1] == toy_vocab.END


def test_examples_round_trip_targets(toy_corpus, toy_vocab, labels):
    for story in toy_corpus[:3]:
        for k, ex in enumerate(make_examples(story, labels, toy_vocab)):
            decoded = toy_vocab.decode_text(ex.target_tokens)
            assert decoded == tokenize(story.sentences[k + 1])[:25]


def test_split_is_story_grained_and_deterministic(toy_examples):
    train, test = split_examples(toy_examples, ratio=0.8, seed=11)
    assert len(train) == 8 * 4 and len(test) == 2 * 4
    train2, test2 = split_examples(toy_examples, ratio=0.8, seed=11)
    assert [e.story_id for e in train] == [e.story_id for e in train2]
    assert not ({e.story_id for e in train} & {e.story_id for e in test})


class _StubClassifier:
    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=float)

    def predict(self, char, tokens):
        return self.probs


def test_augment_zero_probabilities(toy_corpus, labels):
    out = augment_corpus(toy_corpus[:2], _StubClassifier(np.zeros(8)), labels)
    for story in out:
        for ann in story.annotations.values():
            assert ann.workers_plutchik == [[], [], []]
            assert aggregate_plutchik(ann.workers_plutchik, labels).sum() == 0.0


def test_augment_thresholds_at_half(toy_corpus, labels):
    probs = np.zeros(8)
    probs[labels.plutchik_index("joy")] = 0.9
    out = augment_corpus(toy_corpus[:1], _StubClassifier(probs), labels)
    ann = next(iter(out[0].annotations.values()))
    assert ann.workers_plutchik == [["joy"], ["joy"], ["joy"]]


def test_augment_example_count(toy_corpus, toy_vocab, labels):
    stories = augment_corpus(toy_corpus[:3], _StubClassifier(np.zeros(8)), labels)
    examples = [ex for s in stories for ex in make_examples(s, labels, toy_vocab)]
    assert len(examples) == 4 * 3


def test_augment_requires_classifier(toy_corpus, labels):
    with pytest.raises(ClassifierUnavailable):
        augment_corpus(toy_corpus, None, labels)


def test_tokenize_detaches_punctuation():
    assert tokenize("Jane bought a necklace.") == ["jane", "bought", "a", "necklace", "."]
    assert tokenize("don't stop!") == ["don't", "stop", "!"]


def test_detokenize_round_trip():
    tokens = ["jane", "bought", "a", "necklace", "."]
    assert detokenize(tokens) == "Jane bought a necklace."
    assert tokenize(detokenize(tokens)) == tokens


def test_example_record_round_trip(toy_examples):
    for ex in toy_examples[:4]:
        back = example_from_record(json.loads(json.dumps(example_to_record(ex))))
        assert back.story_id == ex.story_id
        assert back.target_tokens == ex.target_tokens
        for a, b in zip(back.char_scores, ex.char_scores):
            assert a.character == b.character
            assert np.allclose(a.plutchik, b.plutchik)
