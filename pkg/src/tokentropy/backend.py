"""Client for completions-style APIs that echo per-token top-k logprobs.

The client scores a fixed prompt (echo mode, no continuation) so every
token of the input gets a next-token distribution from the backend, then
lumps each observed top-k into a distribution. Positions the backend does
not score (typically the first prompt token) are skipped.

Auth tokens are looked up by environment-variable name at request time and
never stored in configuration.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Optional

import httpx

from .distributions import TokenDistribution
from .errors import BackendError, BackendTimeout, UnsupportedBackend
from .records import lump_tail


@dataclass(frozen=True)
class BackendDescriptor:
    """Where and how to reach a scoring backend."""

    base_url: str
    model: str = "default"
    top_k: int = 20
    timeout_s: float = 30.0
    auth_env: Optional[str] = None
    retries: int = 2
    backoff_s: float = 0.5

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")

    def headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            token = os.environ.get(self.auth_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers


def _post_with_retries(backend: BackendDescriptor, payload: dict) -> httpx.Response:
    url = backend.base_url.rstrip("/") + "/completions"
    last_exc: Exception | None = None
    for attempt in range(backend.retries + 1):
        if attempt:
            time.sleep(backend.backoff_s * 2 ** (attempt - 1))
        try:
            resp = httpx.post(
                url, json=payload, headers=backend.headers(), timeout=backend.timeout_s
            )
        except httpx.TimeoutException as exc:
            last_exc = BackendTimeout(f"no answer from {url} within {backend.timeout_s}s")
            last_exc.__cause__ = exc
            continue
        except httpx.HTTPError as exc:
            last_exc = BackendError(0, f"transport failure: {exc}")
            continue
        if resp.status_code >= 500:
            last_exc = BackendError(resp.status_code, resp.text[:200])
            continue
        if resp.status_code >= 300:
            raise BackendError(resp.status_code, resp.text[:200])
        return resp
    raise last_exc  # type: ignore[misc]


def fetch_logprobs(
    backend: BackendDescriptor, prompt: str
) -> tuple[list[TokenDistribution], list[str]]:
    """Score ``prompt`` and return one distribution per scored token.

    Sends prompt + echo + logprobs to the backend's /completions endpoint
    and lumps each position's top-k into a TokenDistribution. Selected
    tokens missing from their own top-k are added from the backend's
    per-token logprob, so chosen-token metrics stay exact.

    Raises:
        BackendTimeout: retries exhausted without an answer.
        BackendError: non-2xx response or transport failure.
        UnsupportedBackend: response carries no per-token logprobs.
    """
    payload = {
        "model": backend.model,
        "prompt": prompt,
        "echo": True,
        "max_tokens": 0,
        "logprobs": backend.top_k,
    }
    resp = _post_with_retries(backend, payload)
    try:
        data = resp.json()
    except ValueError as exc:
        raise BackendError(resp.status_code, resp.text[:200]) from exc

    try:
        logprobs = data["choices"][0]["logprobs"]
        tokens = logprobs["tokens"]
        token_logprobs = logprobs["token_logprobs"]
        top_logprobs = logprobs["top_logprobs"]
    except (KeyError, IndexError, TypeError) as exc:
        raise UnsupportedBackend(
            f"backend response has no usable logprobs field: {str(data)[:200]}"
        ) from exc
    if top_logprobs is None or token_logprobs is None:
        raise UnsupportedBackend("backend does not echo per-token logprobs")

    distributions: list[TokenDistribution] = []
    texts: list[str] = []
    for text, selected_lp, top in zip(tokens, token_logprobs, top_logprobs):
        if selected_lp is None:
            continue  # unscored position (no context yet)
        entries = sorted(top.items(), key=lambda kv: -kv[1])
        if text not in top:
            entries.append((text, float(selected_lp)))
        support_texts = [t for t, _ in entries]
        pairs = [(i, float(lp)) for i, (_, lp) in enumerate(entries)]
        selected_id = support_texts.index(text)
        d = lump_tail(
            pairs, selected_id, position=len(distributions), texts=support_texts
        )
        distributions.append(d)
        texts.append(text)
    if not distributions:
        raise UnsupportedBackend("backend scored no tokens for the prompt")
    return distributions, texts
