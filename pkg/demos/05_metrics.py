"""Evaluation toolkit: BLEU / ROUGE / METEOR-lite on worked examples, and the
emotion-control accuracy protocol end to end on a separable synthetic corpus.

Run: python3 demos/05_metrics.py   (~15s: trains the classifier)
"""

import numpy as np

from storyarc import acer_score, bleu, default_label_space, meteor_lite, rouge, train_acer
from storyarc.corpus import CharArcScores
from storyarc.evaluation import acer_classifier_accuracy
from storyarc.generation import GeneratedStory

labels = default_label_space()

cand = [["the"] * 7]
ref = [["the", "cat", "is", "on", "the", "mat"]]
print("clipped unigram precision ('the' x7 vs 'the cat is on the mat'):",
      f"{bleu(cand, ref, 1):.4f}  (= 2/7)")
print("LCS F1 ('a b c d' vs 'a c d b'):",
      rouge([["a", "b", "c", "d"]], [["a", "c", "d", "b"]], "l"), " (= 0.75)")
pair = [["jane", "bought", "a", "necklace"]]
print("self-comparison:", bleu(pair, pair, 4), rouge(pair, pair, "l"), meteor_lite(pair, pair))
print("meteor-lite stem match ('walked' vs 'walks'):",
      f"{meteor_lite([['she', 'walked', 'home']], [['she', 'walks', 'home']]):.3f}")

# Control accuracy: train the emotion classifier on keyword-separable data
keywords = ["happy", "safe", "afraid", "amazed", "weeping", "gross", "furious", "waiting"]
rng = np.random.default_rng(0)
fillers = ["the", "day", "was", "long", "and", "they", "went", "home"]
pairs = []
for state in range(8):
    for i in range(16):
        words = list(rng.choice(fillers, size=4)) + [keywords[state]]
        rng.shuffle(words)
        target = np.zeros(8)
        target[state] = 1.0
        pairs.append((f"char{i % 3}", words, target))

print(f"\ntraining the emotion classifier on {len(pairs)} pairs ...")
clf = train_acer(pairs, labels, emb_dim=24, hidden=32, epochs=30, lr=1e-2, seed=0)
accuracy = acer_classifier_accuracy(clf, pairs)
print("per-state accuracy:", np.round(accuracy, 3))

# Score a generated story whose sentences carry the right/wrong keywords
target = np.zeros(8)
target[labels.plutchik_index("fear")] = 1.0
scores = [CharArcScores("mia", target, np.zeros(5), np.zeros(19))]
on_target = GeneratedStory(["seed .", "mia was afraid .", "mia was afraid again .",
                            "mia stayed afraid .", "mia was afraid at home ."], [], [])
off_target = GeneratedStory(["seed .", "mia was happy .", "mia was happy again .",
                             "mia stayed happy .", "mia was happy at home ."], [], [])
targets = [[scores] * 4]
print("control accuracy, fearful target + fearful sentences:",
      acer_score([on_target], targets, clf))
print("control accuracy, fearful target + joyful sentences: ",
      acer_score([off_target], targets, clf))
