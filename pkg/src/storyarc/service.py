"""HTTP generation service.

Stateless between requests: the model is loaded once and served read-only;
each request decodes with its own seeded generator, so identical greedy
requests yield byte-identical responses.

    GET  /health    -> {"status": "ok"}
    GET  /labels    -> the label space (three ordered lists)
    POST /generate  -> {"story": [...5], "traces": [...4], "seed": int}

Errors: 400 malformed JSON, 422 invalid request (code + field path),
503 while no model is loaded.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .checkpoint import load_checkpoint
from .errors import StoryArcError
from .generation import GenerationRequest, generate_story, story_to_json
from .model import ModelBundle


def _dumps(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    server_version = "storyarc/0.1"

    def log_message(self, fmt, *args):  # quiet by default
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send(self, status: int, payload: dict):
        body = _dumps(payload)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, message: str, field: str | None = None):
        err = {"code": code, "message": message}
        if field is not None:
            err["field"] = field
        self._send(status, {"error": err})

    def do_GET(self):
        bundle: ModelBundle | None = self.server.bundle
        if self.path == "/health":
            self._send(200, {"status": "ok"})
        elif self.path == "/labels":
            if bundle is None:
                self._error(503, "ModelNotLoaded", "model is still loading")
                return
            self._send(200, bundle.labels.to_json())
        else:
            self._error(404, "NotFound", f"no such path {self.path!r}")

    def do_POST(self):
        if self.path != "/generate":
            self._error(404, "NotFound", f"no such path {self.path!r}")
            return
        bundle: ModelBundle | None = self.server.bundle
        if bundle is None:
            self._error(503, "ModelNotLoaded", "model is still loading")
            return
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._error(400, "MalformedJSON", str(exc))
            return
        try:
            request = GenerationRequest.from_json(obj, bundle.labels)
            story = generate_story(bundle, request)
        except StoryArcError as exc:
            self._error(422, exc.code, str(exc), exc.field)
            return
        self._send(200, story_to_json(story, request, bundle.labels))


class GenerationServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, bundle: ModelBundle | None, verbose: bool = False):
        super().__init__(address, _Handler)
        self.bundle = bundle
        self.verbose = verbose


def make_server(bundle: ModelBundle | None, port: int = 0,
                host: str = "127.0.0.1") -> GenerationServer:
    return GenerationServer((host, port), bundle)


def serve(ckpt_path, port: int, host: str = "127.0.0.1", verbose: bool = True):
    """Load a checkpoint and serve until interrupted."""
    bundle = load_checkpoint(ckpt_path)
    server = GenerationServer((host, port), bundle, verbose=verbose)
    print(f"serving on http://{host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def start_background(bundle: ModelBundle, port: int = 0) -> tuple[GenerationServer, threading.Thread]:
    """Run the server on a daemon thread (used by tests and notebooks)."""
    server = make_server(bundle, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
