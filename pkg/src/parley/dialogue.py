"""Shared name-tagged transcript plus the projection rules that turn it into
each agent's private view of the conversation."""

from __future__ import annotations

import re
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from .errors import EmptyBodyError, UnknownAgentError
from .provider import ProviderMessage

AUTHOR_SUPERVISOR = "supervisor"
AUTHOR_AGENT = "agent"
AUTHOR_EXECUTOR = "executor"
AUTHOR_SYSTEM = "system"

_SUPERVISOR_CALL_RE = re.compile(r"(?<![A-Za-z0-9_@-])@supervisor(?![A-Za-z0-9_-])", re.IGNORECASE)


@dataclass(frozen=True)
class Author:
    kind: str
    name: str | None = None

    @classmethod
    def agent(cls, name: str) -> Author:
        return cls(AUTHOR_AGENT, name)

    def to_dict(self) -> dict:
        if self.name is None:
            return {"kind": self.kind}
        return {"kind": self.kind, "name": self.name}

    @classmethod
    def from_dict(cls, data: dict) -> Author:
        return cls(data["kind"], data.get("name"))


SUPERVISOR = Author(AUTHOR_SUPERVISOR)
EXECUTOR = Author(AUTHOR_EXECUTOR)
SYSTEM = Author(AUTHOR_SYSTEM)


@dataclass(frozen=True)
class Message:
    seq: int
    author: Author
    body: str

    def to_dict(self) -> dict:
        return {"seq": self.seq, "author": self.author.to_dict(), "body": self.body}

    @classmethod
    def from_dict(cls, data: dict) -> Message:
        return cls(data["seq"], Author.from_dict(data["author"]), data["body"])


class Transcript:
    """Append-only conversation log for one session's roster."""

    def __init__(self, roster: Sequence[str]):
        self._roster = {name.lower(): name for name in roster}
        self._messages: list[Message] = []

    @property
    def roster(self) -> tuple[str, ...]:
        return tuple(self._roster.values())

    @property
    def messages(self) -> tuple[Message, ...]:
        return tuple(self._messages)

    def __len__(self) -> int:
        return len(self._messages)

    def __iter__(self) -> Iterator[Message]:
        return iter(self._messages)

    def resolve_agent(self, name: str) -> str:
        stored = self._roster.get(name.lower())
        if stored is None:
            raise UnknownAgentError(name)
        return stored

    def append(self, author: Author, body: str) -> Message:
        """Append a message, normalizing the agent name tag.

        Agent bodies must begin with ``Name: ``; a missing or differently
        cased tag is repaired rather than rejected, because model output is
        not reliable about it.
        """
        body = body.strip()
        if not body:
            raise EmptyBodyError()
        if author.kind == AUTHOR_AGENT:
            stored = self.resolve_agent(author.name or "")
            author = Author.agent(stored)
            body = _ensure_name_tag(stored, body)
        message = Message(len(self._messages), author, body)
        self._messages.append(message)
        return message


def _ensure_name_tag(name: str, body: str) -> str:
    if body.startswith(f"{name}: "):
        return body
    match = re.match(rf"\s*{re.escape(name)}\s*:\s*(.*)\Z", body, re.IGNORECASE | re.DOTALL)
    if match:
        return f"{name}: {match.group(1).strip()}"
    return f"{name}: {body}"


@dataclass(frozen=True)
class RoundRobin:
    """Turn policy: agents speak in a fixed cycle; non-agent messages do not
    advance the rotation."""

    order: tuple[str, ...]


def next_speaker(policy: RoundRobin, transcript: Transcript) -> str:
    if not policy.order:
        raise ValueError("turn order is empty")
    last_agent = None
    for message in reversed(transcript.messages):
        if message.author.kind == AUTHOR_AGENT:
            last_agent = message.author.name
            break
    if last_agent is None:
        return policy.order[0]
    lowered = [name.lower() for name in policy.order]
    index = lowered.index(last_agent.lower())
    return policy.order[(index + 1) % len(policy.order)]


def project_view(transcript: Transcript, agent: str, prompt: str) -> list[ProviderMessage]:
    """The transcript as one agent's chat history.

    The agent's own lines get the assistant role; everything else, the
    supervisor included, reads as user input. Name tags stay in the bodies so
    the agent can still attribute speech.
    """
    stored = transcript.resolve_agent(agent)
    view = [ProviderMessage("system", prompt)]
    for message in transcript:
        if message.author.kind == AUTHOR_AGENT and message.author.name == stored:
            role = "assistant"
        else:
            role = "user"
        view.append(ProviderMessage(role, message.body))
    return view


def detect_supervisor_call(body: str) -> bool:
    """True when the body contains ``@supervisor`` as a standalone token."""
    return bool(_SUPERVISOR_CALL_RE.search(body))
