"""Exception taxonomy. Everything raised on purpose derives from ParleyError."""

from __future__ import annotations


class ParleyError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ParleyError):
    """A session or CLI configuration document is invalid."""

    def __init__(self, detail: str, code: str = "bad_config"):
        super().__init__(detail)
        self.detail = detail
        self.code = code


# --- environment DSL -------------------------------------------------------

class EnvSyntaxError(ParleyError):
    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line
        self.detail = detail


class SelfLoopError(ParleyError):
    def __init__(self, line: int | None, room: str):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}room {room!r} cannot connect to itself")
        self.line = line
        self.room = room


class EmptyEnvironmentError(ParleyError):
    def __init__(self) -> None:
        super().__init__("environment declares no rooms")


class UnknownRoomError(ParleyError):
    def __init__(self, room: str):
        super().__init__(f"unknown room {room!r}")
        self.room = room


# --- personas and dialogue --------------------------------------------------

class ProfileNotInRosterError(ParleyError):
    def __init__(self, name: str):
        super().__init__(f"agent {name!r} is not part of the roster")
        self.name = name


class EmptyBodyError(ParleyError):
    def __init__(self) -> None:
        super().__init__("message body is empty")


class UnknownAgentError(ParleyError):
    def __init__(self, name: str):
        super().__init__(f"no agent named {name!r} in the roster")
        self.name = name


# --- completion providers ----------------------------------------------------

class ProviderError(ParleyError):
    """Base class for completion-backend failures."""


class CompletionTimeoutError(ProviderError):
    def __init__(self, seconds: float):
        super().__init__(f"completion did not return within {seconds} s")
        self.seconds = seconds


class RemoteStatusError(ProviderError):
    def __init__(self, code: int, body_excerpt: str):
        super().__init__(f"remote returned HTTP {code}: {body_excerpt}")
        self.code = code
        self.body_excerpt = body_excerpt


class MalformedResponseError(ProviderError):
    def __init__(self, detail: str):
        super().__init__(f"malformed completion response: {detail}")
        self.detail = detail


class ScriptExhaustedError(ProviderError):
    def __init__(self, consumed: int):
        super().__init__(f"scripted responses exhausted after {consumed} completions")
        self.consumed = consumed


class AuthMissingError(ProviderError):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# --- plan extraction ----------------------------------------------------------

class MissingPlanError(ParleyError):
    """Raised when plan extraction finds no PLAN line for one or more agents.

    Carries whatever was found so callers can still report path problems in
    the partial plans alongside the missing ones.
    """

    def __init__(self, missing: list[str], partial: dict[str, list[str]]):
        super().__init__("no PLAN line found for: " + ", ".join(missing))
        self.missing = missing
        self.partial = partial


# --- simulator ----------------------------------------------------------------

class InvalidPlanSetError(ParleyError):
    def __init__(self, detail: str):
        super().__init__(f"plan set failed the execution gate: {detail}")
        self.detail = detail


class AlreadyCompleteError(ParleyError):
    def __init__(self) -> None:
        super().__init__("execution already reported all plans complete")


class NotAFailureError(ParleyError):
    def __init__(self, kind: str):
        super().__init__(f"event kind {kind!r} is not a failure")
        self.kind = kind


# --- sessions -------------------------------------------------------------------

class WrongPhaseError(ParleyError):
    def __init__(self, operation: str, phase: str):
        super().__init__(f"{operation} is not allowed in phase {phase!r}")
        self.operation = operation
        self.phase = phase


class StorageUnavailableError(ParleyError):
    def __init__(self, detail: str):
        super().__init__(f"session store unavailable: {detail}")
        self.detail = detail


class UnknownSessionError(ParleyError):
    def __init__(self, session_id: str):
        super().__init__(f"no stored session {session_id!r}")
        self.session_id = session_id


class CorruptRecordError(ParleyError):
    def __init__(self, detail: str):
        super().__init__(f"stored session record is corrupt: {detail}")
        self.detail = detail
