"""Command-line entry points.

Subcommands: ingest, train, generate, eval, gradcheck, serve.
Exit codes: 0 success, 1 usage error, 2 runtime failure. Runtime failures
print a machine-readable {"error": {"code", "message"}} object to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint
from .corpus import (
    build_vocab,
    corpus_stats,
    make_examples,
    parse_corpus,
    split_examples,
    tokenize,
    write_examples,
)
from .errors import StoryArcError
from .evaluation import evaluate_generation, score_candidates, train_acer_from_stories
from .generation import GenerationRequest, generate_story, story_to_json
from .labels import default_label_space
from .service import serve
from .training import TrainConfig, gradient_check, micro_config, synthetic_example, train

GRADCHECK_TOLERANCE = 1e-3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="storyarc")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse an annotated corpus and emit training pairs")
    p.add_argument("--raw", required=True, help="annotated corpus (JSONL)")
    p.add_argument("--out", required=True, help="output examples file (JSONL)")
    p.add_argument("--min-count", type=int, default=1)

    p = sub.add_parser("train", help="train a model on an annotated corpus")
    p.add_argument("--config", required=True, help="TrainConfig JSON file")
    p.add_argument("--corpus", required=True, help="annotated corpus (JSONL)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--vectors", help="optional pretrained word vectors (word v1 ... vN per line)")

    p = sub.add_parser("generate", help="generate a story from a request file")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--request", required=True, help="generation request JSON file")
    p.add_argument("--trace", help="write attention traces to this file")

    p = sub.add_parser("eval", help="generate over a corpus and score against references")
    p.add_argument("--ckpt")
    p.add_argument("--corpus", help="annotated corpus; also trains the control classifier")
    p.add_argument("--metrics", default="bleu,rouge,meteor", help="comma list: bleu,rouge,meteor,acer")
    p.add_argument("--out", required=True)
    p.add_argument("--candidates", help="pre-generated candidates (JSONL with text or tokens)")
    p.add_argument("--references", help="references (JSONL with text or tokens)")

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--config", help="TrainConfig JSON file (default: built-in micro config)")

    p = sub.add_parser("serve", help="run the HTTP generation service")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_jsonl_tokens(path) -> list[list[str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            rows.append(list(obj["tokens"]) if "tokens" in obj else tokenize(obj["text"]))
    return rows


def _cmd_ingest(args) -> int:
    labels = default_label_space()
    stories = parse_corpus(args.raw, labels)
    vocab = build_vocab(stories, min_count=args.min_count)
    examples = []
    for story in stories:
        examples.extend(make_examples(story, labels, vocab))
    write_examples(examples, args.out)
    stats = corpus_stats(stories, vocab)
    stats["examples"] = len(examples)
    meta = {"labels": labels.to_json(), "vocab": vocab.id_to_token, "stats": stats}
    with open(str(args.out) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh)
    print(json.dumps(stats, indent=2))
    return 0


def _cmd_train(args) -> int:
    config = TrainConfig.from_json(_read_json(args.config))
    labels = default_label_space()
    stories = parse_corpus(args.corpus, labels)
    vocab = build_vocab(stories, min_count=config.vocab_min_count)
    examples = []
    for story in stories:
        examples.extend(make_examples(story, labels, vocab, config.max_chars))
    train_set, val_set = split_examples(examples, ratio=0.8, seed=config.seed)
    pretrained = None
    if args.vectors:
        from .model import load_word_vectors
        from .rng import stream
        pretrained = load_word_vectors(args.vectors, vocab, config.emb_dim,
                                       stream(config.seed, "init"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report, _bundle = train(config, train_set, val_set or None, vocab, labels,
                            out_dir=out_dir, log_file=out_dir / "train_log.jsonl",
                            pretrained=pretrained)
    print(json.dumps({
        "epochs": len(report.train_nll),
        "best_epoch": report.best_epoch,
        "final_train_nll": report.train_nll[-1],
        "best_val_nll": min((v for v in report.val_nll if v is not None), default=None),
        "parameter_count": report.parameter_count,
        "seconds": report.seconds,
        "checkpoint": report.checkpoint_path,
    }, indent=2))
    return 0


def _cmd_generate(args) -> int:
    bundle = load_checkpoint(args.ckpt)
    request = GenerationRequest.from_json(_read_json(args.request), bundle.labels)
    story = generate_story(bundle, request)
    payload = story_to_json(story, request, bundle.labels)
    print(json.dumps(payload, indent=2))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump({"traces": payload["traces"]}, fh)
    return 0


def _cmd_eval(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    labels = default_label_space()
    if args.candidates or args.references:
        if not (args.candidates and args.references):
            raise StoryArcError("--candidates and --references must be given together")
        candidates = _read_jsonl_tokens(args.candidates)
        references = _read_jsonl_tokens(args.references)
        report = score_candidates(candidates, references, metrics)
    else:
        if not (args.ckpt and args.corpus):
            raise StoryArcError("eval needs either --ckpt with --corpus, or candidate/reference files")
        bundle = load_checkpoint(args.ckpt)
        stories = parse_corpus(args.corpus, bundle.labels)
        clf = None
        if "acer" in metrics:
            clf = train_acer_from_stories(stories, bundle.labels)
        report = evaluate_generation(bundle, stories, metrics, clf=clf)
    payload = report.to_json()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_gradcheck(args) -> int:
    if args.config:
        config = TrainConfig.from_json(_read_json(args.config))
    else:
        config = micro_config()
    vocab_size, example = synthetic_example(config)
    result = gradient_check(config, example, vocab_size)
    for name in sorted(result["per_tensor"]):
        print(f"{name:32s} {result['per_tensor'][name]:.3e}")
    worst = result["max_relative_error"]
    print(f"{'max relative error':32s} {worst:.3e}")
    if worst >= GRADCHECK_TOLERANCE:
        print(f"FAIL: exceeds tolerance {GRADCHECK_TOLERANCE:g}", file=sys.stderr)
        return 2
    print(f"PASS: within tolerance {GRADCHECK_TOLERANCE:g}")
    return 0


def _cmd_serve(args) -> int:
    serve(args.ckpt, args.port, host=args.host)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "generate": _cmd_generate,
    "eval": _cmd_eval,
    "gradcheck": _cmd_gradcheck,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return _COMMANDS[args.command](args)
    except StoryArcError as exc:
        err = {"error": {"code": exc.code, "message": str(exc)}}
        if exc.field is not None:
            err["error"]["field"] = exc.field
        print(json.dumps(err), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": {"code": "IOError", "message": str(exc)}}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
