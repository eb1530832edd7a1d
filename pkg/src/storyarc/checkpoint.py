"""Single-file model checkpoints: a canonical JSON header (config, labels,
vocabulary, tensor manifest) followed by the raw tensor payload.

Layout: 8-byte magic "SOCPCKPT", 4-byte little-endian header length, UTF-8
header JSON, then every tensor in manifest order as row-major 32-bit
little-endian floats. The header JSON is serialized canonically (sorted keys,
no whitespace) so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .autodiff import Node
from .corpus import Vocabulary
from .errors import MalformedRecord, ShapeMismatch
from .labels import PsychLabelSpace
from .model import ModelBundle
from .training import TrainConfig

MAGIC = b"SOCPCKPT"
FORMAT_NAME = "SOCP-CKPT"
FORMAT_VERSION = 1


def _header(bundle: ModelBundle) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": asdict(bundle.config),
        "labels": bundle.labels.to_json(),
        "vocab": list(bundle.vocab.id_to_token),
        "params": [
            {"name": name, "shape": list(p.value.shape), "dtype": "float32"}
            for name, p in bundle.params.items()
        ],
    }


def save_checkpoint(bundle: ModelBundle, path: str | Path):
    header = json.dumps(_header(bundle), sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for p in bundle.params.values():
            fh.write(np.ascontiguousarray(p.value, dtype="<f4").tobytes())


def load_checkpoint(path: str | Path) -> ModelBundle:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise MalformedRecord(0, f"not a checkpoint file: {path}")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
            raise MalformedRecord(0, "unsupported checkpoint format or version")
        config = TrainConfig.from_json(header["config"])
        labels = PsychLabelSpace.from_json(header["labels"])
        vocab = Vocabulary(list(header["vocab"]))
        params: dict[str, Node] = {}
        for entry in header["params"]:
            shape = tuple(entry["shape"])
            n = int(np.prod(shape)) if shape else 1
            raw = fh.read(n * 4)
            if len(raw) != n * 4:
                raise ShapeMismatch(f"checkpoint payload truncated at tensor {entry['name']!r}")
            params[entry["name"]] = Node(np.frombuffer(raw, dtype="<f4").reshape(shape).copy())
        if fh.read(1):
            raise ShapeMismatch("trailing bytes after checkpoint payload")
    return ModelBundle(params=params, config=config, vocab=vocab, labels=labels)
