"""Completion backends: a remote chat-completions endpoint for live use and a
scripted queue for offline, fully deterministic runs."""

from __future__ import annotations

import logging
import os
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import httpx

from .errors import (
    AuthMissingError,
    CompletionTimeoutError,
    MalformedResponseError,
    RemoteStatusError,
    ScriptExhaustedError,
)

logger = logging.getLogger(__name__)

ENDPOINT_ENV = "PARLEY_PROVIDER_URL"
API_KEY_ENV = "PARLEY_PROVIDER_KEY"

SCRIPT_SEPARATOR = "---"


@dataclass(frozen=True)
class ProviderMessage:
    role: str  # "system" | "user" | "assistant"
    content: str


@dataclass(frozen=True)
class CompletionParams:
    model_id: str = "gpt-4-vision-preview"
    temperature: float = 0.7
    max_response_chars: int = 2000
    timeout_seconds: float = 60.0
    history_char_budget: int = 24000

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_response_chars <= 0:
            raise ValueError("max_response_chars must be positive")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")
        if self.history_char_budget <= 0:
            raise ValueError("history_char_budget must be positive")


def _check_request(messages: Sequence[ProviderMessage]) -> None:
    if not messages:
        raise ValueError("completion request has no messages")
    if messages[0].role != "system":
        raise ValueError("first message must carry the system role")


class ScriptedProvider:
    """Replays canned responses in order, recording every request it sees.

    Single-consumer: one session at a time. The recorded calls let tests
    assert exactly which projected view reached the backend.
    """

    def __init__(self, responses: Iterable[str]):
        self._responses = list(responses)
        self._cursor = 0
        self.calls: list[list[ProviderMessage]] = []

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedProvider:
        return cls(parse_script(Path(path).read_text(encoding="utf-8")))

    @property
    def remaining(self) -> int:
        return len(self._responses) - self._cursor

    def complete(self, messages: Sequence[ProviderMessage], params: CompletionParams) -> str:
        _check_request(messages)
        self.calls.append(list(messages))
        if self._cursor >= len(self._responses):
            raise ScriptExhaustedError(self._cursor)
        response = self._responses[self._cursor]
        self._cursor += 1
        return response[: params.max_response_chars]


def parse_script(text: str) -> list[str]:
    """Split script text into responses on lines containing only ``---``.

    Responses are stripped of surrounding whitespace; empty sections are
    dropped.
    """
    responses: list[str] = []
    current: list[str] = []
    for line in text.splitlines():
        if line.strip() == SCRIPT_SEPARATOR:
            block = "\n".join(current).strip()
            if block:
                responses.append(block)
            current = []
        else:
            current.append(line)
    block = "\n".join(current).strip()
    if block:
        responses.append(block)
    return responses


class RemoteProvider:
    """Chat-completions over HTTP with bearer auth.

    One retry on timeout or 5xx, then the failure surfaces to the session so
    the supervisor stays informed. Credentials and endpoint come from the
    PARLEY_PROVIDER_KEY / PARLEY_PROVIDER_URL environment variables unless
    given explicitly.
    """

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        *,
        retry_backoff_seconds: float = 2.0,
    ):
        self._endpoint = endpoint if endpoint is not None else os.environ.get(ENDPOINT_ENV)
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self._retry_backoff_seconds = retry_backoff_seconds

    def complete(self, messages: Sequence[ProviderMessage], params: CompletionParams) -> str:
        _check_request(messages)
        if not self._api_key:
            raise AuthMissingError(f"no API key: set {API_KEY_ENV}")
        if not self._endpoint:
            raise AuthMissingError(f"no endpoint: set {ENDPOINT_ENV}")
        payload = {
            "model": params.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": params.temperature,
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        last_error: Exception | None = None
        for attempt in range(2):
            if attempt:
                time.sleep(self._retry_backoff_seconds)
            try:
                response = httpx.post(
                    self._endpoint,
                    json=payload,
                    headers=headers,
                    timeout=params.timeout_seconds,
                )
            except httpx.TimeoutException:
                last_error = CompletionTimeoutError(params.timeout_seconds)
                logger.warning("completion timed out (attempt %d)", attempt + 1)
                continue
            if response.status_code >= 500:
                last_error = RemoteStatusError(response.status_code, response.text[:200])
                logger.warning("remote 5xx (attempt %d): %s", attempt + 1, response.status_code)
                continue
            if response.status_code != 200:
                raise RemoteStatusError(response.status_code, response.text[:200])
            return self._extract_text(response)[: params.max_response_chars]
        assert last_error is not None
        raise last_error

    @staticmethod
    def _extract_text(response: httpx.Response) -> str:
        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedResponseError(f"response is not JSON: {exc}") from exc
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError("missing choices[0].message.content") from exc
        if not isinstance(text, str):
            raise MalformedResponseError("completion content is not text")
        return text


def truncate_history(
    messages: Sequence[ProviderMessage], budget_chars: int
) -> list[ProviderMessage]:
    """Keep the system message plus the longest recent suffix within budget.

    The budget covers only the non-system elements; the system message is
    always retained, even when it alone exceeds the budget (callers may want
    to flag that case).
    """
    _check_request(messages)
    system, rest = messages[0], list(messages[1:])
    kept: list[ProviderMessage] = []
    total = 0
    for message in reversed(rest):
        if total + len(message.content) > budget_chars:
            break
        kept.append(message)
        total += len(message.content)
    kept.reverse()
    return [system, *kept]


def system_over_budget(messages: Sequence[ProviderMessage], budget_chars: int) -> bool:
    return bool(messages) and len(messages[0].content) > budget_chars
