"""Chat-completions transport with retries and bounded concurrency.

Talks to any OpenAI-compatible endpoint (``{base_url}/chat/completions``,
bearer auth). A transport callable can be injected in place of HTTP, which
the tests and the CLI mock mode use for fully deterministic runs.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import httpx

from sheetqa.prompts import PromptSpec

ENV_BASE_URL = "OPENAI_BASE_URL"
ENV_API_KEY = "OPENAI_API_KEY"
ENV_MODEL = "OPENAI_MODEL"

ANNOTATION_TEMPERATURE = 1.0
INFERENCE_TEMPERATURE = 0.7


class EndpointUnavailable(RuntimeError):
    """Endpoint could not be reached or kept failing after retries."""


class AuthError(RuntimeError):
    """Endpoint rejected the credentials."""


@dataclass
class EndpointConfig:
    base_url: str = ""
    api_key: str = ""
    model: str = ""
    timeout: float = 60.0
    max_retries: int = 3
    max_concurrency: int = 4
    retry_backoff: float = 0.5
    seed: int | None = None

    @classmethod
    def from_env(cls, **overrides) -> "EndpointConfig":
        merged = {
            "base_url": os.environ.get(ENV_BASE_URL, ""),
            "api_key": os.environ.get(ENV_API_KEY, ""),
            "model": os.environ.get(ENV_MODEL, ""),
        }
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**merged)


class ScriptedTransport:
    """Canned replies, consumed one scripted batch per request.

    Each script entry is the list of completions one request returns. If a
    request asks for more completions than the entry holds, the entry is
    cycled to length; a flat list of strings acts as a single entry.
    """

    def __init__(self, script):
        entries = list(script)
        if entries and isinstance(entries[0], str):
            entries = [entries]
        self._entries = entries
        self._i = 0
        self.requests: list[dict] = []

    def __call__(self, payload: dict) -> list[str]:
        self.requests.append(payload)
        if self._i >= len(self._entries):
            raise EndpointUnavailable("scripted transport ran out of replies")
        entry = list(self._entries[self._i])
        self._i += 1
        n = payload.get("n", 1)
        if not entry:
            return []
        if n <= len(entry):
            return entry[:n]
        return [entry[i % len(entry)] for i in range(n)]


class ChatClient:
    """Thin synchronous client; safe for concurrent use across threads."""

    def __init__(self, config: EndpointConfig, transport=None):
        self.config = config
        self._transport = transport
        self._gate = threading.Semaphore(config.max_concurrency)
        if transport is None and not config.base_url:
            raise EndpointUnavailable(
                f"no endpoint configured: set {ENV_BASE_URL} or pass a transport"
            )

    def complete(self, system: str, user: str, n: int = 1, temperature: float = 1.0) -> list[str]:
        """Return exactly n completions, topping up with extra requests if
        the endpoint returns fewer choices than asked."""
        if n < 1:
            raise ValueError("n must be >= 1")
        collected: list[str] = []
        while len(collected) < n:
            batch = self._request(system, user, n - len(collected), temperature)
            if not batch:
                raise EndpointUnavailable("endpoint returned no completions")
            collected.extend(batch)
        return collected[:n]

    def sample(self, prompt: PromptSpec, n: int = 1, temperature: float = 1.0) -> list[str]:
        return self.complete(prompt.system, prompt.user, n=n, temperature=temperature)

    def _request(self, system: str, user: str, n: int, temperature: float) -> list[str]:
        payload = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "n": n,
            "temperature": temperature,
        }
        if self.config.seed is not None:
            payload["seed"] = self.config.seed
        with self._gate:
            if self._transport is not None:
                return list(self._transport(payload))
            return self._http_request(payload)

    def _http_request(self, payload: dict) -> list[str]:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_error = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(self.config.retry_backoff * (2 ** (attempt - 1)))
            try:
                response = httpx.post(
                    url, json=payload, headers=headers, timeout=self.config.timeout
                )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({response.status_code})")
            if response.status_code == 429 or response.status_code >= 500:
                last_error = RuntimeError(f"HTTP {response.status_code}")
                continue
            if response.status_code != 200:
                raise EndpointUnavailable(
                    f"endpoint error {response.status_code}: {response.text[:200]}"
                )
            return _extract_choices(response.json())
        raise EndpointUnavailable(f"endpoint unreachable after retries: {last_error}")


def _extract_choices(body: dict) -> list[str]:
    try:
        return [choice["message"]["content"] or "" for choice in body["choices"]]
    except (KeyError, TypeError) as exc:
        raise EndpointUnavailable(f"malformed endpoint response: {exc}") from exc


def sample(config: EndpointConfig, prompt: PromptSpec, n: int, temperature: float) -> list[str]:
    """One-shot convenience wrapper around ChatClient.sample."""
    return ChatClient(config).sample(prompt, n=n, temperature=temperature)
