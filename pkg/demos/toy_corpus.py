"""A small synthetic annotated corpus shared by the demo scripts.

Ten five-sentence stories with two characters each, annotated in the same
JSONL shape a real corpus would use. Tiny enough that every demo runs in
seconds, regular enough that a small model can memorize it.
"""

import json

SUBJECTS = ["tom", "anna", "ben", "kate", "max", "lily", "sam", "ruth", "jake", "mia"]
OBJECTS = ["ball", "book", "kite", "coin", "shell", "ring", "drum", "map", "rope", "lamp"]
FRIENDS = ["dad", "mom", "leo", "zoe", "gus", "ivy", "ned", "fay", "rex", "una"]
MOODS = [("joy", "glad"), ("sadness", "sad"), ("fear", "afraid"), ("surprise", "amazed"),
         ("anger", "angry"), ("trust", "calm"), ("anticipation", "eager"), ("joy", "happy"),
         ("disgust", "upset"), ("surprise", "shocked")]
MASLOW = ["physiological", "stability", "love", "esteem", "spiritual growth"]
REISS = ["status", "idealism", "power", "family", "food", "indep", "belonging",
         "competition", "honor", "romance", "savings", "contact", "health",
         "serenity", "curiosity", "approval", "rest", "tranquility", "order"]


def build_records(n_stories=10):
    records = []
    for i in range(n_stories):
        s, obj, friend = SUBJECTS[i], OBJECTS[i], FRIENDS[i]
        emotion, adj = MOODS[i]
        annotations = []
        for k in range(1, 6):
            annotations.append({"sentence": k, "character": s,
                                "workers_plutchik": [[emotion]] * 3,
                                "maslow": [MASLOW[i % 5]], "reiss": [REISS[i % 19]]})
            if k >= 3:
                annotations.append({"sentence": k, "character": friend,
                                    "workers_plutchik": [["joy"], ["joy"]],
                                    "maslow": [MASLOW[i % 5]], "reiss": []})
        records.append({
            "story_id": f"story{i}",
            "sentences": [
                f"{s} found a {obj} .",
                f"{s} was very {adj} .",
                f"{s} showed the {obj} to {friend} .",
                f"{friend} smiled at {s} .",
                f"{s} kept the {obj} at home .",
            ],
            "characters": [s, friend],
            "annotations": annotations,
        })
    return records


def write_corpus(path, n_stories=10):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in build_records(n_stories):
            fh.write(json.dumps(rec) + "\n")
    return path
