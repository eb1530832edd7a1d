"""Automatic evaluation: BLEU, ROUGE, METEOR-lite and the emotion-control
accuracy protocol.

METEOR is implemented as "meteor-lite": exact plus suffix-stem matching, no
synonym resource, so absolute values are not comparable to reference
implementations. The control-accuracy metric scores, for every evaluable
(sentence, character) pair, whether a classifier's top predicted emotion lies
in the requested target set.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ag
from .autodiff import Node
from .corpus import CharArcScores, Vocabulary, tokenize
from .errors import ClassifierUnavailable, EmptyCorpus, EmptyDataset, NoEvaluablePairs
from .labels import N_PLUTCHIK, PsychLabelSpace
from .optim import AdamState, adam_step
from .rng import split_streams


# ---------------------------------------------------------------------------
# BLEU

def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(candidates: list[list[str]], references: list[list[str]],
                       n: int) -> tuple[int, int]:
    """Corpus-level clipped n-gram counts: (matched, total)."""
    matched = total = 0
    for cand, ref in zip(candidates, references):
        c_counts = _ngram_counts(cand, n)
        r_counts = _ngram_counts(ref, n)
        matched += sum(min(count, r_counts[gram]) for gram, count in c_counts.items())
        total += sum(c_counts.values())
    return matched, total


def bleu(candidates: list[list[str]], references: list[list[str]], n: int = 4) -> float:
    """Corpus BLEU-n: geometric mean of clipped k-gram precisions for k=1..n
    times the brevity penalty. No smoothing; any zero precision gives 0."""
    if not candidates or len(candidates) != len(references):
        raise EmptyCorpus("need equal, non-empty candidate and reference lists")
    log_sum = 0.0
    for k in range(1, n + 1):
        matched, total = modified_precision(candidates, references, k)
        if matched == 0 or total == 0:
            return 0.0
        log_sum += math.log(matched / total)
    c = sum(len(x) for x in candidates)
    r = sum(len(x) for x in references)
    bp = 1.0 if c >= r else math.exp(1.0 - r / c) if c > 0 else 0.0
    return bp * math.exp(log_sum / n)


# ---------------------------------------------------------------------------
# ROUGE

def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _f1(overlap: float, c_total: int, r_total: int) -> float:
    if overlap == 0 or c_total == 0 or r_total == 0:
        return 0.0
    p = overlap / c_total
    r = overlap / r_total
    return 2 * p * r / (p + r)


def rouge(candidates: list[list[str]], references: list[list[str]],
          variant: str = "l") -> float:
    """Mean per-pair F1. Variants: "1"/"2" use clipped n-gram overlap, "l"
    uses the longest common subsequence."""
    if not candidates or len(candidates) != len(references):
        raise EmptyCorpus("need equal, non-empty candidate and reference lists")
    variant = str(variant).lower()
    scores = []
    for cand, ref in zip(candidates, references):
        if variant in ("1", "2"):
            n = int(variant)
            c_counts = _ngram_counts(cand, n)
            r_counts = _ngram_counts(ref, n)
            overlap = sum(min(count, r_counts[g]) for g, count in c_counts.items())
            scores.append(_f1(overlap, sum(c_counts.values()), sum(r_counts.values())))
        elif variant == "l":
            scores.append(_f1(_lcs_length(cand, ref), len(cand), len(ref)))
        else:
            raise ValueError(f"unknown variant {variant!r}")
    return float(np.mean(scores))


# ---------------------------------------------------------------------------
# METEOR-lite

_SUFFIXES = ("ing", "ed", "es", "ly", "s")


def _stem(token: str) -> str:
    for suffix in _SUFFIXES:
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def _align(cand: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Greedy left-to-right alignment: exact matches first, stem matches on
    the leftovers."""
    matches: list[tuple[int, int]] = []
    used = [False] * len(ref)
    cand_matched = [False] * len(cand)
    for exact in (True, False):
        for i, tok in enumerate(cand):
            if cand_matched[i]:
                continue
            key = tok if exact else _stem(tok)
            for j, rtok in enumerate(ref):
                if used[j]:
                    continue
                if (rtok == key) if exact else (_stem(rtok) == key):
                    matches.append((i, j))
                    used[j] = True
                    cand_matched[i] = True
                    break
    return sorted(matches)


def _chunks(matches: list[tuple[int, int]]) -> int:
    count = 0
    prev = None
    for ci, ri in matches:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            count += 1
        prev = (ci, ri)
    return count


def fragmentation_penalty(chunks: int, matches: int) -> float:
    """The raw fragmentation term 0.5 * (chunks / matches)^3."""
    return 0.5 * (chunks / matches) ** 3


def meteor_lite(candidates: list[list[str]], references: list[list[str]]) -> float:
    """Recall-weighted harmonic mean over exact+stem matches with a
    fragmentation penalty. A single-chunk (perfectly ordered, contiguous)
    alignment is treated as unfragmented, so self-comparison scores 1.0."""
    if not candidates or len(candidates) != len(references):
        raise EmptyCorpus("need equal, non-empty candidate and reference lists")
    scores = []
    for cand, ref in zip(candidates, references):
        matches = _align(cand, ref)
        m = len(matches)
        if m == 0 or not cand or not ref:
            scores.append(0.0)
            continue
        p = m / len(cand)
        r = m / len(ref)
        f_mean = 10 * p * r / (r + 9 * p)
        ch = _chunks(matches)
        penalty = fragmentation_penalty(ch, m) if ch > 1 else 0.0
        scores.append(f_mean * (1.0 - penalty))
    return float(np.mean(scores))


# ---------------------------------------------------------------------------
# Emotion-control classifier (bidirectional recurrent, multi-label sigmoid)

@dataclass
class AcerClassifier:
    """Predicts a character's 8 emotion probabilities from the character name
    concatenated with the sentence."""

    params: dict[str, Node]
    vocab: Vocabulary
    labels: PsychLabelSpace
    hidden: int

    def _forward(self, char: str, sentence_tokens: list[str]) -> Node:
        ids = self.vocab.encode(tokenize(char) + list(sentence_tokens))
        if not ids:
            ids = [Vocabulary.UNK]
        p = self.params
        xs = [ag.reshape(ag.embedding(p["embed"], [i]), (-1,)) for i in ids]
        from .model import run_bilstm  # local import to avoid a cycle
        _, final = run_bilstm(p, "clf", 1, xs, self.hidden, p["embed"].value.dtype)
        hid = ag.relu(ag.add(ag.matmul(p["dense_W"], final), p["dense_b"]))
        return ag.add(ag.matmul(p["out_W"], hid), p["out_b"])

    def predict(self, char: str, sentence_tokens: list[str]) -> np.ndarray:
        logits = self._forward(char, sentence_tokens)
        return ag.sigmoid(logits).value.copy()


def _init_clf_params(vocab_size: int, emb: int, hidden: int, rng, dtype=np.float32):
    from .model import _add_lstm, _normal, _uniform, _zeros
    params: dict[str, Node] = {}
    params["embed"] = _normal(rng, (vocab_size, emb), dtype)
    _add_lstm(params, rng, "clf", 1, emb, hidden, dtype)
    params["dense_W"] = _uniform(rng, (hidden, 2 * hidden), dtype)
    params["dense_b"] = _zeros((hidden,), dtype)
    params["out_W"] = _uniform(rng, (N_PLUTCHIK, hidden), dtype)
    params["out_b"] = _zeros((N_PLUTCHIK,), dtype)
    return params


def train_acer(pairs: list[tuple[str, list[str], np.ndarray]], labels: PsychLabelSpace,
               emb_dim: int = 64, hidden: int = 128, epochs: int = 20,
               lr: float = 1e-3, batch: int = 8, seed: int = 0) -> AcerClassifier:
    """Multi-label binary cross-entropy training of the emotion classifier.

    ``pairs`` holds (character, sentence tokens, 8-dim multi-hot target); the
    same sentence appears once per character, with different targets.
    """
    if not pairs:
        raise EmptyDataset("no classifier training pairs")
    counts = Counter()
    for char, toks, _ in pairs:
        counts.update(tokenize(char) + list(toks))
    vocab = Vocabulary(list(Vocabulary.SPECIALS) + sorted(counts, key=lambda t: (-counts[t], t)))

    streams = split_streams(seed)
    params = _init_clf_params(len(vocab), emb_dim, hidden, streams["init"])
    clf = AcerClassifier(params, vocab, labels, hidden)
    adam = AdamState(lr=lr)
    for _epoch in range(epochs):
        order = streams["batching"].permutation(len(pairs))
        for start in range(0, len(order), batch):
            idx = order[start:start + batch]
            ag.zero_grads(params.values())
            for i in idx:
                char, toks, target = pairs[i]
                logits = clf._forward(char, toks)
                loss = ag.bce_with_logits(logits, np.asarray(target))
                ag.backward(loss, seed=1.0 / len(idx))
            adam_step(params, adam)
    return clf


def acer_classifier_accuracy(clf: AcerClassifier,
                             pairs: list[tuple[str, list[str], np.ndarray]]) -> np.ndarray:
    """Per-state accuracy of thresholded (0.5) predictions."""
    correct = np.zeros(N_PLUTCHIK)
    for char, toks, target in pairs:
        pred = clf.predict(char, toks) > 0.5
        correct += pred == (np.asarray(target) > 0.5)
    return correct / len(pairs)


def acer_score(stories, targets: list[list[list[CharArcScores]]], clf,
               rule: str = "argmax_in_target", top_k: int = 2,
               jaccard_threshold: float = 0.5) -> float:
    """Control accuracy over every (generated sentence, non-padding character)
    pair with a nonzero emotion target.

    Matching rules: "argmax_in_target" (default) counts a hit when the
    classifier's top emotion lies in the target set; "topk_overlap" when any
    of the top-k predictions does; "jaccard" thresholds the Jaccard overlap
    of the thresholded prediction set against the target set.
    """
    hits = 0
    pairs = 0
    for story, story_targets in zip(stories, targets):
        generated = story.sentences[1:]
        for sent_idx, sentence in enumerate(generated):
            tokens = tokenize(sentence)
            for cs in story_targets[sent_idx]:
                if cs.is_padding():
                    continue
                target_set = {i for i in range(N_PLUTCHIK) if cs.plutchik[i] > 0}
                if not target_set:
                    continue
                probs = clf.predict(cs.character, tokens)
                if rule == "argmax_in_target":
                    hit = int(np.argmax(probs)) in target_set
                elif rule == "topk_overlap":
                    top = set(np.argsort(probs)[::-1][:top_k].tolist())
                    hit = bool(top & target_set)
                elif rule == "jaccard":
                    pred_set = {i for i in range(N_PLUTCHIK) if probs[i] > 0.5}
                    union = pred_set | target_set
                    hit = bool(union) and len(pred_set & target_set) / len(union) >= jaccard_threshold
                else:
                    raise ValueError(f"unknown matching rule {rule!r}")
                hits += int(hit)
                pairs += 1
    if pairs == 0:
        raise NoEvaluablePairs("no (sentence, character) pair has a nonzero emotion target")
    return hits / pairs


# ---------------------------------------------------------------------------
# Reports

@dataclass
class MetricReport:
    bleu_1: float | None = None
    bleu_2: float | None = None
    bleu_3: float | None = None
    bleu_4: float | None = None
    rouge_1: float | None = None
    rouge_2: float | None = None
    rouge_l: float | None = None
    meteor: float | None = None
    acer: float | None = None
    pairs: int = 0

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def score_candidates(candidates: list[list[str]], references: list[list[str]],
                     metrics: list[str]) -> MetricReport:
    report = MetricReport(pairs=len(candidates))
    wanted = set(metrics)
    if "bleu" in wanted:
        report.bleu_1 = bleu(candidates, references, 1)
        report.bleu_2 = bleu(candidates, references, 2)
        report.bleu_3 = bleu(candidates, references, 3)
        report.bleu_4 = bleu(candidates, references, 4)
    if "rouge" in wanted:
        report.rouge_1 = rouge(candidates, references, "1")
        report.rouge_2 = rouge(candidates, references, "2")
        report.rouge_l = rouge(candidates, references, "l")
    if "meteor" in wanted:
        report.meteor = meteor_lite(candidates, references)
    return report


def build_acer_pairs(stories, labels: PsychLabelSpace) -> list[tuple[str, list[str], np.ndarray]]:
    """Classifier training pairs from gold annotations: one pair per
    annotated (sentence, character), target = which emotions scored > 0."""
    from .corpus import aggregate_plutchik
    pairs = []
    for story in stories:
        for (sent, char), ann in story.annotations.items():
            target = (aggregate_plutchik(ann.workers_plutchik, labels) > 0).astype(float)
            pairs.append((char, tokenize(story.sentences[sent - 1]), target))
    return pairs


def train_acer_from_stories(stories, labels: PsychLabelSpace, **kwargs) -> AcerClassifier:
    return train_acer(build_acer_pairs(stories, labels), labels, **kwargs)


def evaluate_generation(bundle, stories, metrics: list[str], clf=None,
                        decode: str = "greedy", seed: int = 0) -> MetricReport:
    """Generate every story's continuation from its first sentence and gold
    per-sentence scores, then score against the gold sentences.

    Generation conditions on previously *generated* sentences; gold text is
    used only as the reference side of the metrics (and as the input
    sentence).
    """
    from .corpus import MAX_CONTEXT_TOKENS, MAX_SENT_TOKENS, cap_characters, detokenize, scores_for_sentence
    from .generation import GeneratedStory, generate_sentence
    unk_token = Vocabulary.SPECIALS[3]

    candidates: list[list[str]] = []
    references: list[list[str]] = []
    acer_stories = []
    acer_targets = []
    rng = np.random.default_rng(seed)
    vocab = bundle.vocab
    for story in stories:
        capped = cap_characters(story, bundle.config.max_chars)
        generated = [story.sentences[0]]
        history = [tokenize(story.sentences[0])[:MAX_SENT_TOKENS]]
        story_targets = []
        for k in range(1, 5):
            scores = scores_for_sentence(story, k + 1, capped, bundle.labels)
            context: list[str] = []
            for prev in history[: k - 1]:
                context.extend(prev)
            context = context[-MAX_CONTEXT_TOKENS:]
            out_ids, _ = generate_sentence(
                bundle, vocab.encode(context), vocab.encode(history[k - 1]), scores,
                decode=decode, rng=rng)
            tokens = vocab.decode_text(out_ids)
            candidates.append(tokens)
            references.append(tokenize(story.sentences[k])[:MAX_SENT_TOKENS])
            generated.append(detokenize(tokens) if tokens else "")
            # an empty generation still has to feed the next encoder pass
            history.append(tokens[:MAX_SENT_TOKENS] or [unk_token])
            story_targets.append(scores)
        acer_stories.append(GeneratedStory(generated, [], []))
        acer_targets.append(story_targets)

    report = score_candidates(candidates, references, metrics)
    if "acer" in metrics:
        if clf is None:
            raise ClassifierUnavailable("control-accuracy scoring needs a trained classifier")
        report.acer = acer_score(acer_stories, acer_targets, clf)
    return report
