"""The HTTP service end to end: build a checkpoint, serve it in-process, hit
/health, /labels and /generate, and show the error contract.

Run: python3 demos/06_service_roundtrip.py
"""

import json
import tempfile
import urllib.error
import urllib.request
from pathlib import Path

from toy_corpus import write_corpus

from storyarc import build_vocab, default_label_space, parse_corpus
from storyarc.checkpoint import load_checkpoint, save_checkpoint
from storyarc.model import ModelBundle, init_params
from storyarc.rng import split_streams
from storyarc.service import start_background
from storyarc.training import TrainConfig

labels = default_label_space()
with tempfile.TemporaryDirectory() as td:
    stories = parse_corpus(write_corpus(Path(td) / "toy.jsonl"), labels)
    vocab = build_vocab(stories)
    config = TrainConfig(emb_dim=16, hidden=16, enc_layers=1, dropout=0.0,
                         batch=4, lr=1e-3, epochs=1, seed=0)
    params = init_params(config, len(vocab), split_streams(0)["init"])
    ckpt = Path(td) / "demo.ckpt"
    save_checkpoint(ModelBundle(params, config, vocab, labels), ckpt)
    bundle = load_checkpoint(ckpt)
    print(f"checkpoint: {ckpt.stat().st_size} bytes, {len(bundle.params)} tensors")

server, _ = start_background(bundle, port=0)
base = f"http://127.0.0.1:{server.server_address[1]}"
print("serving on", base)


def get(path):
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read())


def post(path, obj):
    req = urllib.request.Request(base + path, data=json.dumps(obj).encode(),
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


print("/health ->", get("/health"))
print("/labels -> plutchik:", get("/labels")["plutchik_labels"])

joy = [0.0] * 8
joy[0] = 1.0
request = {
    "first_sentence": "tom found a ball .",
    "characters": ["tom"],
    "plutchik_arcs": [[joy] * 4],
    "maslow": ["love"],
    "reiss": ["contact"],
    "decode": "greedy",
    "seed": 0,
}
status, body = post("/generate", request)
print(f"/generate -> {status}, story:")
for sentence in body["story"]:
    print("  ", sentence)
trace = body["traces"][0]
print(f"first trace: {len(trace['tokens'])} tokens x {len(trace['slot_labels'])} state slots")

bad = dict(request, plutchik_arcs=[[joy] * 2])
status, body = post("/generate", bad)
print(f"wrong arc length -> {status}: {body['error']}")

server.shutdown()
print("done")
