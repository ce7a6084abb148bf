"""Deterministic scoring backend for tests and offline demos.

Serves a completions-style /completions endpoint backed by a trigram
table built from a fixed reference text (the bundled preamble by default).
Contexts seen in the reference produce sharply peaked distributions over
their known continuations; unseen contexts fall back to a uniform
distribution over the whole vocabulary. Scoring the reference text itself
therefore yields low surprisal and entropy, while scrambled variants of it
(word reversal included) yield high values: the structure-destruction
contrast is built in and fully reproducible.

Run standalone with ``python -m tokentropy.stub_backend --port 8100``.
"""

from __future__ import annotations

import argparse
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

UNKNOWN = "<unk>"
PEAK_LOGIT = 8.0


class TrigramScorer:
    """Whitespace-token trigram-indicator model over a reference text."""

    def __init__(self, reference_text: str):
        words = reference_text.split()
        if not words:
            raise ValueError("reference text must contain at least one word")
        self.vocab = sorted(set(words)) + [UNKNOWN]
        self.index = {w: i for i, w in enumerate(self.vocab)}
        self.continuations: dict[tuple[str, str], set[str]] = {}
        padded = [None, None] + words
        for a, b, c in zip(padded, padded[1:], padded[2:]):
            self.continuations.setdefault((a, b), set()).add(c)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def _canon(self, word: str | None) -> str | None:
        if word is None:
            return None
        return word if word in self.index else UNKNOWN

    def logits_at(self, words: list[str], position: int) -> np.ndarray:
        """Raw scores for the token at ``position`` given its two-word context."""
        context = (
            self._canon(words[position - 2]) if position >= 2 else None,
            self._canon(words[position - 1]) if position >= 1 else None,
        )
        logits = np.zeros(self.vocab_size, dtype=np.float64)
        known = self.continuations.get(context)
        if known:
            for w in known:
                logits[self.index[w]] = PEAK_LOGIT
        return logits

    def score_words(self, words: list[str]) -> list[np.ndarray]:
        return [self.logits_at(words, t) for t in range(len(words))]

    def score_text(self, text: str) -> tuple[list[str], list[str], list[np.ndarray]]:
        """Split, render token texts (leading space after the first), score."""
        words = text.split()
        token_texts = [w if i == 0 else " " + w for i, w in enumerate(words)]
        return words, token_texts, self.score_words(words)


def completion_response(
    scorer: TrigramScorer, prompt: str, model: str, top_k: int
) -> dict:
    """Build the completions-style response body for an echo scoring call."""
    words, token_texts, logit_rows = scorer.score_text(prompt)
    tokens: list[str] = []
    token_logprobs: list[float] = []
    top_logprobs: list[dict[str, float]] = []
    for t, (word, text, logits) in enumerate(zip(words, token_texts, logit_rows)):
        log_probs = logits - _logsumexp(logits)
        selected = scorer.index.get(word, scorer.index[UNKNOWN])
        order = np.argsort(-log_probs, kind="stable")[:top_k]
        prefix = "" if t == 0 else " "
        # The selected entry is keyed by its surface form even when it maps
        # to the unknown-word bucket: a real tokenizer-backed API renders
        # top-k keys and the token list with the same strings.
        def render(i: int) -> str:
            if i == selected:
                return text
            return prefix + scorer.vocab[i]

        top = {render(i): float(log_probs[i]) for i in order}
        tokens.append(text)
        token_logprobs.append(float(log_probs[selected]))
        top_logprobs.append(top)
    return {
        "object": "text_completion",
        "model": model,
        "choices": [
            {
                "text": prompt,
                "index": 0,
                "logprobs": {
                    "tokens": tokens,
                    "token_logprobs": token_logprobs,
                    "top_logprobs": top_logprobs,
                },
                "finish_reason": "length",
            }
        ],
    }


def _logsumexp(values: np.ndarray) -> float:
    m = float(np.max(values))
    return m + float(np.log(np.sum(np.exp(values - m))))


class StubBackendServer:
    """Threaded HTTP server wrapping a TrigramScorer.

    ``supports_logprobs=False`` makes it answer without any logprobs field,
    for exercising the UnsupportedBackend path.
    """

    def __init__(
        self,
        reference_text: str | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
        supports_logprobs: bool = True,
    ):
        if reference_text is None:
            from .session import preamble_text

            reference_text = preamble_text()
        self.scorer = TrigramScorer(reference_text)
        scorer = self.scorer

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output quiet
                pass

            def do_POST(self):
                if self.path.rstrip("/") not in ("/completions", "/v1/completions"):
                    self._reply(404, {"error": "unknown endpoint"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    body = json.loads(self.rfile.read(length))
                    prompt = body["prompt"]
                    top_k = int(body.get("logprobs") or 0)
                except (ValueError, KeyError) as exc:
                    self._reply(400, {"error": f"bad request: {exc}"})
                    return
                doc = completion_response(
                    scorer, prompt, body.get("model", "stub"), top_k or scorer.vocab_size
                )
                if not supports_logprobs:
                    doc["choices"][0].pop("logprobs")
                self._reply(200, doc)

            def _reply(self, status: int, doc: dict):
                payload = json.dumps(doc).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

        self.httpd = ThreadingHTTPServer((host, port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubBackendServer":
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def __enter__(self) -> "StubBackendServer":
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def main(argv=None):
    parser = argparse.ArgumentParser(description="Run the deterministic stub backend.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    parser.add_argument("--reference-file", help="train on this text instead of the bundled one")
    args = parser.parse_args(argv)
    reference = None
    if args.reference_file:
        with open(args.reference_file, encoding="utf-8") as f:
            reference = f.read()
    server = StubBackendServer(reference, host=args.host, port=args.port)
    print(f"stub backend listening on {server.url} (vocab {server.scorer.vocab_size})")
    try:
        server.httpd.serve_forever()
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
