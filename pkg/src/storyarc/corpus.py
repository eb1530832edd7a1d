"""Annotated five-sentence story corpus: parsing, score aggregation,
vocabulary construction and training-pair emission.

Corpus wire format is JSONL, one story per line:

    {"story_id": str,
     "sentences": [5 strings],
     "characters": [str, ...],                       # 1..6 names
     "annotations": [{"sentence": int (1-based),
                      "character": str,
                      "workers_plutchik": [[str...], ...],  # up to 3 worker label-sets
                      "maslow": [str...],
                      "reiss": [str...]}, ...]}

Aggregation rules: an emotion counts only when at least 2 of the 3 workers
marked it, and its score is workers/3 (so scores lie in {0, 2/3, 1});
need/motive label-sets become multi-hot vectors.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ClassifierUnavailable,
    EmptyCorpus,
    MalformedRecord,
    UnknownLabel,
    WrongSentenceCount,
)
from .labels import (
    N_MASLOW,
    N_PLUTCHIK,
    N_REISS,
    PADDING_CHARACTER,
    PsychLabelSpace,
)

SENTENCES_PER_STORY = 5
MAX_CHARACTERS = 3
MAX_WORKERS = 3
MAX_SENT_TOKENS = 25
MAX_CONTEXT_TOKENS = 100
PLUTCHIK_AGREEMENT = 2  # minimum workers marking a state for it to score

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)?|[^a-z0-9\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase, whitespace split, punctuation detached as its own tokens."""
    return _TOKEN_RE.findall(text.lower())


_NO_SPACE_BEFORE = set(".,!?;:%)]}'" + "’")
_NO_SPACE_AFTER = set("([{$" + "‘")


def detokenize(tokens: list[str]) -> str:
    """Join tokens, reattach sentence punctuation, capitalize the first letter."""
    parts: list[str] = []
    for tok in tokens:
        if parts and (tok in _NO_SPACE_BEFORE or parts[-1] in _NO_SPACE_AFTER):
            parts[-1] += tok
        else:
            parts.append(tok)
    text = " ".join(parts)
    for i, ch in enumerate(text):
        if ch.isalpha():
            return text[:i] + ch.upper() + text[i + 1:]
    return text


@dataclass
class Annotation:
    workers_plutchik: list[list[str]]
    maslow: list[str]
    reiss: list[str]


@dataclass
class RawStory:
    story_id: str
    sentences: list[str]
    characters: list[str]
    annotations: dict[tuple[int, str], Annotation]  # keyed by (1-based sentence, character)


@dataclass
class CharArcScores:
    """Per-character psychological scores for one sentence."""

    character: str
    plutchik: np.ndarray  # (8,) in [0,1]
    maslow: np.ndarray    # (5,) in {0,1}
    reiss: np.ndarray     # (19,) in {0,1}

    @classmethod
    def padding(cls) -> "CharArcScores":
        return cls(PADDING_CHARACTER, np.zeros(N_PLUTCHIK), np.zeros(N_MASLOW), np.zeros(N_REISS))

    def slot_vector(self) -> np.ndarray:
        return np.concatenate([self.plutchik, self.maslow, self.reiss])

    def is_padding(self) -> bool:
        return self.character == PADDING_CHARACTER


@dataclass
class StoryExample:
    """One training pair: sentences 1..k-1 as context, sentence k as input,
    sentence k+1 (with start/end markers) as target."""

    story_id: str
    context_tokens: list[int]
    input_tokens: list[int]
    target_tokens: list[int]
    char_scores: list[CharArcScores]  # always MAX_CHARACTERS entries


@dataclass
class Vocabulary:
    id_to_token: list[str]
    token_to_id: dict[str, int] = field(init=False)

    PAD, START, END, UNK = 0, 1, 2, 3
    SPECIALS = ("<pad>", "<s>", "</s>", "<unk>")

    def __post_init__(self):
        self.token_to_id = {tok: i for i, tok in enumerate(self.id_to_token)}

    def __len__(self):
        return len(self.id_to_token)

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.token_to_id.get(tok, self.UNK) for tok in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.id_to_token[i] for i in ids]

    def decode_text(self, ids: list[int]) -> list[str]:
        """Decode, dropping structural markers."""
        skip = {self.PAD, self.START, self.END}
        return [self.id_to_token[i] for i in ids if i not in skip]


def _check(cond: bool, line: int, message: str):
    if not cond:
        raise MalformedRecord(line, message)


def parse_story(obj: dict, labels: PsychLabelSpace, line: int = 0) -> RawStory:
    _check(isinstance(obj, dict), line, "record is not a JSON object")
    for key in ("story_id", "sentences", "characters", "annotations"):
        _check(key in obj, line, f"missing field {key!r}")
    story_id = obj["story_id"]
    _check(isinstance(story_id, str) and story_id, line, "story_id must be a non-empty string")
    sentences = obj["sentences"]
    _check(isinstance(sentences, list) and all(isinstance(s, str) for s in sentences),
           line, "sentences must be a list of strings")
    if len(sentences) != SENTENCES_PER_STORY:
        raise WrongSentenceCount(story_id, len(sentences))
    characters = obj["characters"]
    _check(isinstance(characters, list) and all(isinstance(c, str) for c in characters),
           line, "characters must be a list of strings")
    _check(1 <= len(characters) <= 6, line, f"expected 1..6 characters, got {len(characters)}")
    _check(len(set(characters)) == len(characters), line, "duplicate character names")
    _check(PADDING_CHARACTER not in characters, line, f"{PADDING_CHARACTER!r} is reserved for padding")

    plutchik_names = set(labels.plutchik_labels)
    maslow_names = set(labels.maslow_labels)
    reiss_names = set(labels.reiss_labels)
    annotations: dict[tuple[int, str], Annotation] = {}
    _check(isinstance(obj["annotations"], list), line, "annotations must be a list")
    for ann in obj["annotations"]:
        _check(isinstance(ann, dict), line, "annotation is not an object")
        sent = ann.get("sentence")
        _check(isinstance(sent, int) and 1 <= sent <= SENTENCES_PER_STORY,
               line, f"annotation sentence index {sent!r} out of range")
        char = ann.get("character")
        _check(char in characters, line, f"annotation references undeclared character {char!r}")
        _check((sent, char) not in annotations, line,
               f"duplicate annotation for sentence {sent}, character {char!r}")
        workers = ann.get("workers_plutchik", [])
        _check(isinstance(workers, list) and len(workers) <= MAX_WORKERS,
               line, f"at most {MAX_WORKERS} worker label-sets allowed")
        for ws in workers:
            _check(isinstance(ws, list), line, "worker label-set must be a list")
            for name in ws:
                if name not in plutchik_names:
                    raise UnknownLabel(name)
        maslow = ann.get("maslow", [])
        reiss = ann.get("reiss", [])
        for name in maslow:
            if name not in maslow_names:
                raise UnknownLabel(name)
        for name in reiss:
            if name not in reiss_names:
                raise UnknownLabel(name)
        annotations[(sent, char)] = Annotation([list(ws) for ws in workers], list(maslow), list(reiss))
    return RawStory(story_id, list(sentences), list(characters), annotations)


def parse_corpus(path: str | Path, labels: PsychLabelSpace) -> list[RawStory]:
    """Parse a JSONL corpus file; malformed lines are rejected with their
    1-based line number."""
    stories: list[RawStory] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON ({exc.msg})") from None
            stories.append(parse_story(obj, labels, line=line_no))
    return stories


def aggregate_plutchik(worker_sets: list[list[str]], labels: PsychLabelSpace) -> np.ndarray:
    """Majority-filtered emotion scores: count/3 when >=2 of 3 workers marked
    the state, else 0."""
    if len(worker_sets) > MAX_WORKERS:
        raise ValueError(f"at most {MAX_WORKERS} worker label-sets allowed")
    counts = np.zeros(N_PLUTCHIK)
    for ws in worker_sets:
        for name in set(ws):
            counts[labels.plutchik_index(name)] += 1
    scores = np.where(counts >= PLUTCHIK_AGREEMENT, counts / MAX_WORKERS, 0.0)
    return scores


def encode_needs(maslow_set: list[str], reiss_set: list[str],
                 labels: PsychLabelSpace) -> tuple[np.ndarray, np.ndarray]:
    """Multi-hot need/motive vectors (annotations may carry several labels)."""
    maslow = np.zeros(N_MASLOW)
    for name in maslow_set:
        maslow[labels.maslow_index(name)] = 1.0
    reiss = np.zeros(N_REISS)
    for name in reiss_set:
        reiss[labels.reiss_index(name)] = 1.0
    return maslow, reiss


def cap_characters(story: RawStory, max_chars: int = MAX_CHARACTERS) -> list[str]:
    """Keep the max_chars characters with the most annotated sentences (ties
    broken by first appearance), padded with the reserved name."""
    sentences_annotated: dict[str, set[int]] = {c: set() for c in story.characters}
    for (sent, char) in story.annotations:
        sentences_annotated[char].add(sent)
    order = {c: i for i, c in enumerate(story.characters)}
    ranked = sorted(story.characters, key=lambda c: (-len(sentences_annotated[c]), order[c]))
    kept = ranked[:max_chars]
    return kept + [PADDING_CHARACTER] * (max_chars - len(kept))


def scores_for_sentence(story: RawStory, sentence: int, capped: list[str],
                        labels: PsychLabelSpace) -> list[CharArcScores]:
    """Aggregated per-character scores for one 1-based sentence index."""
    result = []
    for char in capped:
        ann = story.annotations.get((sentence, char))
        if char == PADDING_CHARACTER or ann is None:
            result.append(CharArcScores(char, np.zeros(N_PLUTCHIK), np.zeros(N_MASLOW), np.zeros(N_REISS)))
            continue
        plutchik = aggregate_plutchik(ann.workers_plutchik, labels)
        maslow, reiss = encode_needs(ann.maslow, ann.reiss, labels)
        result.append(CharArcScores(char, plutchik, maslow, reiss))
    return result


def build_vocab(stories: list[RawStory], min_count: int = 1) -> Vocabulary:
    """Frequency-filtered vocabulary over all story sentences; tokens below
    min_count map to the unknown id."""
    if not stories:
        raise EmptyCorpus("no stories to build a vocabulary from")
    counts: Counter[str] = Counter()
    for story in stories:
        for sentence in story.sentences:
            counts.update(tokenize(sentence))
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], t))
    return Vocabulary(list(Vocabulary.SPECIALS) + kept)


def make_examples(story: RawStory, labels: PsychLabelSpace, vocab: Vocabulary,
                  max_chars: int = MAX_CHARACTERS) -> list[StoryExample]:
    """Emit the 4 consecutive-sentence training pairs of one story."""
    capped = cap_characters(story, max_chars)
    sent_tokens = [tokenize(s)[:MAX_SENT_TOKENS] for s in story.sentences]
    examples = []
    for k in range(1, SENTENCES_PER_STORY):
        context: list[str] = []
        for prev in sent_tokens[: k - 1]:
            context.extend(prev)
        context = context[-MAX_CONTEXT_TOKENS:]  # truncate from the left
        target_ids = [vocab.START] + vocab.encode(sent_tokens[k]) + [vocab.END]
        examples.append(StoryExample(
            story_id=story.story_id,
            context_tokens=vocab.encode(context),
            input_tokens=vocab.encode(sent_tokens[k - 1]),
            target_tokens=target_ids,
            char_scores=scores_for_sentence(story, k + 1, capped, labels),
        ))
    return examples


def split_examples(examples: list[StoryExample], ratio: float = 0.8,
                   seed: int = 0) -> tuple[list[StoryExample], list[StoryExample]]:
    """Deterministic train/test split at story granularity: all 4 examples of
    a story land on the same side."""
    if not examples:
        raise EmptyCorpus("nothing to split")
    story_ids: list[str] = []
    seen = set()
    for ex in examples:
        if ex.story_id not in seen:
            seen.add(ex.story_id)
            story_ids.append(ex.story_id)
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(len(story_ids)))
    n_train = int(len(story_ids) * ratio)
    train_ids = {story_ids[i] for i in order[:n_train]}
    train = [ex for ex in examples if ex.story_id in train_ids]
    test = [ex for ex in examples if ex.story_id not in train_ids]
    return train, test


def augment_corpus(stories: list[RawStory], classifier, labels: PsychLabelSpace,
                   threshold: float = 0.5) -> list[RawStory]:
    """Label unannotated stories with classifier-predicted emotion states.

    Each (sentence, character) pair gets the classifier's thresholded state
    set, encoded as a synthetic full-agreement worker triple; need/motive
    annotations stay empty (the classifier covers emotions only).
    """
    if classifier is None:
        raise ClassifierUnavailable("no trained classifier supplied")
    out = []
    for story in stories:
        annotations: dict[tuple[int, str], Annotation] = {}
        for sent in range(1, SENTENCES_PER_STORY + 1):
            for char in story.characters:
                probs = classifier.predict(char, tokenize(story.sentences[sent - 1]))
                marked = [labels.plutchik_labels[i] for i in range(N_PLUTCHIK) if probs[i] > threshold]
                annotations[(sent, char)] = Annotation([list(marked)] * MAX_WORKERS, [], [])
        out.append(RawStory(story.story_id, list(story.sentences), list(story.characters), annotations))
    return out


def character_count_histogram(stories: list[RawStory]) -> dict[int, int]:
    """Per-sentence histogram of how many characters carry annotations
    (sentences with zero annotated characters are not counted)."""
    hist: Counter[int] = Counter()
    for story in stories:
        per_sentence: Counter[int] = Counter()
        for (sent, _char) in story.annotations:
            per_sentence[sent] += 1
        for n in per_sentence.values():
            hist[n] += 1
    return dict(sorted(hist.items()))


def corpus_stats(stories: list[RawStory], vocab: Vocabulary | None = None) -> dict:
    hist = character_count_histogram(stories)
    stats = {
        "stories": len(stories),
        "sentences": len(stories) * SENTENCES_PER_STORY,
        "annotation_rows": sum(len(s.annotations) for s in stories),
        "character_count_histogram": {str(k): v for k, v in hist.items()},
    }
    if vocab is not None:
        stats["vocab_size"] = len(vocab)
    return stats


# ---------------------------------------------------------------------------
# Example-file IO (JSONL of StoryExample with integer ids and float scores)

def example_to_record(ex: StoryExample) -> dict:
    return {
        "story_id": ex.story_id,
        "context_tokens": ex.context_tokens,
        "input_tokens": ex.input_tokens,
        "target_tokens": ex.target_tokens,
        "char_scores": [
            {
                "character": cs.character,
                "plutchik": [float(x) for x in cs.plutchik],
                "maslow": [float(x) for x in cs.maslow],
                "reiss": [float(x) for x in cs.reiss],
            }
            for cs in ex.char_scores
        ],
    }


def example_from_record(obj: dict) -> StoryExample:
    return StoryExample(
        story_id=obj["story_id"],
        context_tokens=list(obj["context_tokens"]),
        input_tokens=list(obj["input_tokens"]),
        target_tokens=list(obj["target_tokens"]),
        char_scores=[
            CharArcScores(
                cs["character"],
                np.asarray(cs["plutchik"], dtype=float),
                np.asarray(cs["maslow"], dtype=float),
                np.asarray(cs["reiss"], dtype=float),
            )
            for cs in obj["char_scores"]
        ],
    )


def write_examples(examples: list[StoryExample], path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_record(ex)) + "\n")


def read_examples(path: str | Path) -> list[StoryExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                examples.append(example_from_record(json.loads(line)))
    return examples
