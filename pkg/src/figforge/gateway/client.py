"""Gateway: caching, rate limiting, retries around interchangeable backends.

Wire format (HTTP backend) is chat-completions-style JSON:

* ``POST {base_url}/chat/completions`` with ``model``, ``messages`` (system
  string + user content parts; images as data-URL ``image_url`` parts),
  ``temperature``, ``max_tokens``, ``seed``; reply carries
  ``choices[0].message.content`` and ``usage``.
* ``POST {base_url}/embeddings`` with ``model`` and ``input`` (list of
  strings); reply carries ``data[i].embedding`` and ``usage``.

Credentials come from the environment variable named by the endpoint's
``credential_ref``; they never appear in config files.
"""
from __future__ import annotations

import base64
import json
import logging
import os
import random
import threading
from collections import defaultdict

import httpx

from ..errors import AuthError, BackendRefusal, MalformedReply, RateLimitExhausted
from .cache import ReplyCache
from .model import (
    EMBED,
    ImagePart,
    ModelCall,
    ModelEndpointConfig,
    ModelReply,
    TextPart,
    cache_key,
)
from .ratelimit import Clock, SlidingWindowLimiter, SystemClock

logger = logging.getLogger(__name__)

BACKOFF_BASE = 0.5  # seconds; doubles per retry, plus jitter


class TransientBackendError(Exception):
    """Retryable failure: HTTP 429, 5xx, or a timeout."""


class GatewayStats:
    """Per-endpoint counters; snapshot() feeds the run report."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counters: dict[str, dict[str, int]] = defaultdict(
            lambda: {"calls": 0, "cache_hits": 0, "requests": 0, "retries": 0, "failures": 0}
        )

    def bump(self, endpoint_id: str, counter: str, by: int = 1) -> None:
        with self._lock:
            self._counters[endpoint_id][counter] += by

    def get(self, endpoint_id: str, counter: str) -> int:
        with self._lock:
            return self._counters[endpoint_id][counter]

    def snapshot(self) -> dict:
        with self._lock:
            return {k: dict(v) for k, v in self._counters.items()}


class HttpBackend:
    """httpx-based backend speaking the wire format above."""

    def __init__(self, transport: httpx.BaseTransport | None = None, environ: dict | None = None):
        self._client = httpx.Client(transport=transport)
        self._environ = environ if environ is not None else os.environ

    def _headers(self, config: ModelEndpointConfig) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if config.credential_ref:
            secret = self._environ.get(config.credential_ref)
            if not secret:
                raise AuthError(f"credential env var {config.credential_ref!r} is not set")
            headers["Authorization"] = f"Bearer {secret}"
        return headers

    def send(self, config: ModelEndpointConfig, call: ModelCall) -> ModelReply:
        if call.kind == EMBED:
            url = f"{config.base_url.rstrip('/')}/embeddings"
            body = {"model": config.model_name, "input": call.text_parts()}
        else:
            url = f"{config.base_url.rstrip('/')}/chat/completions"
            body = {
                "model": config.model_name,
                "messages": self._messages(call),
                "temperature": call.sampling.temperature,
                "max_tokens": call.sampling.max_tokens,
            }
            if call.sampling.seed is not None:
                body["seed"] = call.sampling.seed
        try:
            response = self._client.post(url, json=body, headers=self._headers(config), timeout=config.timeout)
        except httpx.TimeoutException as exc:
            raise TransientBackendError(f"timeout after {config.timeout}s") from exc

        if response.status_code in (401, 403):
            raise AuthError(f"endpoint {config.endpoint_id!r} rejected credentials ({response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientBackendError(f"HTTP {response.status_code}")
        if response.status_code >= 400:
            raise BackendRefusal(f"HTTP {response.status_code}: {response.text[:500]}", response.status_code)
        return self._parse(call, response.text)

    @staticmethod
    def _messages(call: ModelCall) -> list[dict]:
        content: list[dict] = []
        for part in call.user_parts:
            if isinstance(part, TextPart):
                content.append({"type": "text", "text": part.text})
            elif isinstance(part, ImagePart):
                b64 = base64.b64encode(part.data).decode("ascii")
                content.append({"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}})
        messages = []
        if call.system_prompt:
            messages.append({"role": "system", "content": call.system_prompt})
        messages.append({"role": "user", "content": content})
        return messages

    @staticmethod
    def _parse(call: ModelCall, body: str) -> ModelReply:
        try:
            data = json.loads(body)
            usage = dict(data.get("usage") or {})
            if call.kind == EMBED:
                vectors = tuple(tuple(float(v) for v in row["embedding"]) for row in data["data"])
                return ModelReply(vectors=vectors, usage=usage)
            text = data["choices"][0]["message"]["content"]
            if not isinstance(text, str):
                raise TypeError("content is not a string")
            return ModelReply(text=text, usage=usage)
        except (KeyError, IndexError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise MalformedReply(f"unparseable endpoint reply: {exc}", body=body) from exc


class Gateway:
    """invoke() = cache -> rate limit -> backend with retries -> cache."""

    def __init__(
        self,
        cache: ReplyCache,
        backend,
        clock: Clock | None = None,
        rng: random.Random | None = None,
    ):
        self.cache = cache
        self.backend = backend
        self.clock = clock or SystemClock()
        self.stats = GatewayStats()
        self._rng = rng or random.Random()
        self._limiters: dict[str, SlidingWindowLimiter] = {}
        self._limiter_lock = threading.Lock()

    def _limiter(self, config: ModelEndpointConfig) -> SlidingWindowLimiter:
        with self._limiter_lock:
            limiter = self._limiters.get(config.endpoint_id)
            if limiter is None:
                limiter = SlidingWindowLimiter(config.requests_per_minute, self.clock)
                self._limiters[config.endpoint_id] = limiter
            return limiter

    def invoke(self, config: ModelEndpointConfig, call: ModelCall) -> ModelReply:
        key = cache_key(config, call)
        self.stats.bump(config.endpoint_id, "calls")
        cached = self.cache.get(key)
        if cached is not None:
            self.stats.bump(config.endpoint_id, "cache_hits")
            return cached

        attempts_allowed = 1 + max(0, config.max_retries)
        last_error: Exception | None = None
        for attempt in range(1, attempts_allowed + 1):
            self._limiter(config).acquire()
            self.stats.bump(config.endpoint_id, "requests")
            try:
                reply = self.backend.send(config, call)
            except TransientBackendError as exc:
                last_error = exc
                if attempt < attempts_allowed:
                    self.stats.bump(config.endpoint_id, "retries")
                    backoff = BACKOFF_BASE * (2 ** (attempt - 1)) * (1 + self._rng.random())
                    logger.debug("%s attempt %d failed (%s); backing off %.2fs",
                                 config.endpoint_id, attempt, exc, backoff)
                    self.clock.sleep(backoff)
                continue
            self.cache.put(key, reply)
            return reply
        self.stats.bump(config.endpoint_id, "failures")
        raise RateLimitExhausted(
            f"endpoint {config.endpoint_id!r}: {attempts_allowed} attempts failed ({last_error})"
        )
