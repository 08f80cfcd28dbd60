"""Session state machine: wires personas, dialogue, the completion provider,
plan extraction, and the simulator into one supervised pipeline.

A session moves through setup -> discussion -> awaiting_approval ->
executing -> completed, bouncing back to discussion whenever the supervisor
asks for changes, a plan fails validation, or the fleet reports a blocked
route. Every transcript append and phase change lands in the session journal,
which the gateway streams out verbatim.
"""

from __future__ import annotations

import hashlib
import json
import os
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import planex, sim
from .dialogue import (
    EXECUTOR,
    SUPERVISOR,
    SYSTEM,
    Author,
    Message,
    RoundRobin,
    Transcript,
    detect_supervisor_call,
    next_speaker,
    project_view,
)
from .envgraph import (
    EmptyPath,
    NonAdjacent,
    RoomGraph,
    UnknownRoom,
    is_room_token,
    parse_environment,
)
from .errors import (
    ConfigError,
    CorruptRecordError,
    EmptyBodyError,
    MissingPlanError,
    ProviderError,
    StorageUnavailableError,
    UnknownRoomError,
    UnknownSessionError,
    WrongPhaseError,
)
from .persona import AgentProfile, build_system_message, default_debate_guidance
from .planex import ValidationReport, extract_plan_set, resolve_plan_set, validate_plan_set
from .provider import (
    CompletionParams,
    RemoteProvider,
    ScriptedProvider,
    system_over_budget,
    truncate_history,
)

DATA_DIR_ENV = "PARLEY_DATA_DIR"

EVENT_PHASE_CHANGED = "phase_changed"
EVENT_MESSAGE_APPENDED = "message_appended"
EVENT_PLAN_VALIDATED = "plan_validated"
EVENT_EXECUTION = "execution_event"
EVENT_ERROR = "error"


class SessionPhase(str, Enum):
    SETUP = "setup"
    DISCUSSION = "discussion"
    AWAITING_APPROVAL = "awaiting_approval"
    EXECUTING = "executing"
    COMPLETED = "completed"
    ABORTED = "aborted"


_TRANSITIONS: set[tuple[SessionPhase, SessionPhase]] = {
    (SessionPhase.SETUP, SessionPhase.DISCUSSION),
    (SessionPhase.DISCUSSION, SessionPhase.AWAITING_APPROVAL),
    (SessionPhase.AWAITING_APPROVAL, SessionPhase.DISCUSSION),
    (SessionPhase.AWAITING_APPROVAL, SessionPhase.EXECUTING),
    (SessionPhase.EXECUTING, SessionPhase.DISCUSSION),
    (SessionPhase.EXECUTING, SessionPhase.COMPLETED),
}


def transition_allowed(current: SessionPhase, new: SessionPhase) -> bool:
    return new is SessionPhase.ABORTED or (current, new) in _TRANSITIONS


@dataclass
class SessionConfig:
    agents: list[AgentProfile]
    environment: str
    provider_kind: str = "scripted"
    params: CompletionParams = field(default_factory=CompletionParams)
    scripted_responses: list[str] | None = None
    turn_order: list[str] | None = None
    max_rounds: int = 12
    auto_approve: bool = False
    execution: sim.ExecutionConfig = field(default_factory=sim.ExecutionConfig)

    def to_document(self) -> dict:
        return {
            "agents": [
                {"name": a.name, "description": a.description, "start_room": a.start_room}
                for a in self.agents
            ],
            "environment": self.environment,
            "provider": {
                "kind": self.provider_kind,
                "params": {
                    "model_id": self.params.model_id,
                    "temperature": self.params.temperature,
                    "max_response_chars": self.params.max_response_chars,
                    "timeout_seconds": self.params.timeout_seconds,
                    "history_char_budget": self.params.history_char_budget,
                },
                "responses": self.scripted_responses,
            },
            "turn_order": self.turn_order,
            "max_rounds": self.max_rounds,
            "auto_approve": self.auto_approve,
            "execution": self.execution.to_dict(),
        }

    @classmethod
    def from_document(cls, doc: dict) -> SessionConfig:
        if not isinstance(doc, dict):
            raise ConfigError("config document must be an object")
        try:
            agents = [
                AgentProfile(a["name"], a.get("description", ""), a["start_room"])
                for a in doc.get("agents", [])
            ]
            provider_doc = doc.get("provider") or {}
            params_doc = provider_doc.get("params") or {}
            params = CompletionParams(**params_doc)
            execution = sim.ExecutionConfig.from_dict(doc.get("execution") or {})
            config = cls(
                agents=agents,
                environment=doc.get("environment", ""),
                provider_kind=provider_doc.get("kind", "scripted"),
                params=params,
                scripted_responses=provider_doc.get("responses"),
                turn_order=doc.get("turn_order"),
                max_rounds=int(doc.get("max_rounds", 12)),
                auto_approve=bool(doc.get("auto_approve", False)),
                execution=execution,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config document: {exc}") from exc
        if config.max_rounds <= 0:
            raise ConfigError("max_rounds must be positive")
        return config


def config_hash(config: SessionConfig) -> str:
    canonical = json.dumps(config.to_document(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_provider(config: SessionConfig):
    if config.provider_kind == "scripted":
        return ScriptedProvider(config.scripted_responses or [])
    if config.provider_kind == "remote":
        return RemoteProvider()
    raise ConfigError(f"unknown provider kind {config.provider_kind!r}", code="bad_provider")


@dataclass(frozen=True)
class SessionEvent:
    """One journal record; the gateway exposes these 1:1 as stream events."""

    seq: int
    type: str
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "type": self.type, "payload": self.payload}


class Session:
    """All state for one mission, mutated only through the operations below.

    Operations are not thread-safe; callers serialize access per session
    (the gateway holds one lock per session, the CLI is single-threaded).
    """

    def __init__(self, config: SessionConfig, provider=None):
        if not config.agents:
            raise ConfigError("at least one agent is required", code="empty_roster")
        self.config = config
        self.id = uuid.uuid4().hex
        self.graph: RoomGraph = parse_environment(config.environment)
        seen: set[str] = set()
        for profile in config.agents:
            if not is_room_token(profile.name):
                raise ConfigError(f"invalid agent name {profile.name!r}", code="bad_agent_name")
            if profile.name.lower() in seen:
                raise ConfigError(f"duplicate agent name {profile.name!r}", code="duplicate_agent")
            seen.add(profile.name.lower())
            if not self.graph.has_room(profile.start_room):
                raise UnknownRoomError(profile.start_room)
        self.roster: list[AgentProfile] = list(config.agents)
        guidance = default_debate_guidance()
        self.prompts: dict[str, str] = {
            p.name: build_system_message(p, self.roster, self.graph, guidance)
            for p in self.roster
        }
        self.policy = RoundRobin(self._resolve_turn_order(config.turn_order))
        self.transcript = Transcript([p.name for p in self.roster])
        self.positions: dict[str, str] = {
            p.name: self.graph.resolve(p.start_room) or p.start_room for p in self.roster
        }
        self.provider = provider if provider is not None else build_provider(config)
        self.phase = SessionPhase.SETUP
        self.plan: planex.PlanSet | None = None
        self.execution: sim.ExecutionState | None = None
        self.rounds_used = 0
        self.journal: list[SessionEvent] = []
        self.last_validation: ValidationReport | None = None

    def _resolve_turn_order(self, order: list[str] | None) -> tuple[str, ...]:
        names = {p.name.lower(): p.name for p in self.roster}
        if order is None:
            return tuple(p.name for p in self.roster)
        resolved = [names.get(name.lower()) for name in order]
        if None in resolved or sorted(n.lower() for n in order) != sorted(names):
            raise ConfigError(
                "turn_order must be a permutation of the roster names", code="bad_turn_order"
            )
        return tuple(resolved)  # type: ignore[arg-type]

    # --- journal -----------------------------------------------------------

    def _journal(self, type_: str, payload: dict) -> SessionEvent:
        event = SessionEvent(len(self.journal), type_, payload)
        self.journal.append(event)
        return event

    def _append(self, author: Author, body: str) -> Message:
        message = self.transcript.append(author, body)
        self._journal(EVENT_MESSAGE_APPENDED, {"message": message.to_dict()})
        return message

    def _set_phase(self, new: SessionPhase, reason: str) -> None:
        assert transition_allowed(self.phase, new), f"{self.phase} -> {new}"
        self.phase = new
        if new is SessionPhase.DISCUSSION:
            self.rounds_used = 0
        self._journal(EVENT_PHASE_CHANGED, {"phase": new.value, "reason": reason})

    def _require(self, operation: str, *phases: SessionPhase) -> None:
        if self.phase not in phases:
            raise WrongPhaseError(operation, self.phase.value)

    def _positions_text(self) -> str:
        return "; ".join(f"{agent} is in {room}" for agent, room in self.positions.items())

    def snapshot(self) -> dict:
        """Deep, comparable copy of all observable state."""
        return {
            "phase": self.phase.value,
            "positions": dict(self.positions),
            "transcript": [m.to_dict() for m in self.transcript],
            "plan": None if self.plan is None else {a: list(p) for a, p in self.plan.items()},
            "rounds_used": self.rounds_used,
            "execution": None if self.execution is None else self.execution.to_dict(),
            "journal_length": len(self.journal),
        }

    # --- pipeline operations -------------------------------------------------

    def submit_task(self, text: str) -> Message:
        """Supervisor presents the task; discussion opens."""
        self._require("submit_task", SessionPhase.SETUP)
        message = self._append(SUPERVISOR, text)
        self._set_phase(SessionPhase.DISCUSSION, "task_submitted")
        return message

    def advance_discussion(self) -> Message:
        """Run one agent turn: project the transcript, complete, append.

        Provider failures do not abort the session; they append a system
        notice and stay in discussion so the supervisor can intervene.
        """
        self._require("advance_discussion", SessionPhase.DISCUSSION)
        speaker = next_speaker(self.policy, self.transcript)
        view = project_view(self.transcript, speaker, self.prompts[speaker])
        budget = self.config.params.history_char_budget
        if system_over_budget(view, budget):
            self._journal(
                EVENT_ERROR,
                {"code": "system_prompt_over_budget", "agent": speaker, "detail":
                 f"system prompt exceeds the {budget}-char history budget"},
            )
        view = truncate_history(view, budget)
        try:
            reply = self.provider.complete(view, self.config.params)
            if not reply.strip():
                raise ProviderError("backend returned an empty completion")
        except ProviderError as exc:
            notice = self._append(SYSTEM, f"provider error on {speaker}'s turn: {exc}")
            self._journal(
                EVENT_ERROR, {"code": "provider_error", "agent": speaker, "detail": str(exc)}
            )
            return notice
        message = self._append(Author.agent(speaker), reply)
        if detect_supervisor_call(message.body):
            self._set_phase(SessionPhase.AWAITING_APPROVAL, "supervisor_called")
        if speaker.lower() == self.policy.order[-1].lower():
            self.rounds_used += 1
        if self.phase is SessionPhase.DISCUSSION and self.rounds_used >= self.config.max_rounds:
            self._append(
                SYSTEM,
                f"round cap of {self.config.max_rounds} reached; waiting for the supervisor",
            )
            self._set_phase(SessionPhase.AWAITING_APPROVAL, "round_cap")
        return message

    def supervisor_feedback(self, text: str) -> Message:
        """Supervisor text during discussion, review, or execution.

        During execution this is an interrupt: robots freeze in their current
        rooms, an executor status line records them, and discussion reopens
        with the new information.
        """
        self._require(
            "supervisor_feedback",
            SessionPhase.DISCUSSION,
            SessionPhase.AWAITING_APPROVAL,
            SessionPhase.EXECUTING,
        )
        if not text.strip():
            raise EmptyBodyError()
        if self.phase is SessionPhase.EXECUTING:
            assert self.execution is not None
            self.positions = self.execution.positions
            self.execution = None
            self._append(
                EXECUTOR,
                f"Execution interrupted by the supervisor. Current positions: "
                f"{self._positions_text()}.",
            )
            message = self._append(SUPERVISOR, text)
            self._set_phase(SessionPhase.DISCUSSION, "interrupt")
        elif self.phase is SessionPhase.AWAITING_APPROVAL:
            message = self._append(SUPERVISOR, text)
            self._set_phase(SessionPhase.DISCUSSION, "alterations_requested")
        else:
            message = self._append(SUPERVISOR, text)
        return message

    def approve(self) -> ValidationReport:
        """Supervisor approves: extract plans, validate, start execution.

        Extraction or validation failures bounce the session back to
        discussion with an executor critique naming every problem, so the
        agents can repair their plans themselves.
        """
        self._require("approve", SessionPhase.AWAITING_APPROVAL)
        roster_names = [p.name for p in self.roster]
        try:
            plans = extract_plan_set(self.transcript, roster_names)
        except MissingPlanError as exc:
            stated: planex.PlanSet = exc.partial
            report = validate_plan_set(stated, self.graph, self.positions)
            report.ok = False
        else:
            stated = plans
            report = validate_plan_set(plans, self.graph, self.positions)
        self.last_validation = report
        self._journal(
            EVENT_PLAN_VALIDATED,
            {"ok": report.ok, "plans": {a: list(p) for a, p in stated.items()},
             "report": report.to_dict()},
        )
        if not report.ok:
            self._append(EXECUTOR, _critique(report))
            self._set_phase(SessionPhase.DISCUSSION, "plan_rejected")
            return report
        resolved = resolve_plan_set(plans, self.graph)
        self.plan = resolved
        self.execution = sim.start_execution(resolved, self.graph, self.config.execution)
        self._set_phase(SessionPhase.EXECUTING, "plan_approved")
        self._record_execution_events(self.execution.events)
        self._after_tick(self.execution.events)
        return report

    def step_execution(self) -> list[sim.ExecutionEvent]:
        """One simulator tick; blocked routes trigger the replanning loop."""
        self._require("step_execution", SessionPhase.EXECUTING)
        assert self.execution is not None
        events = self.execution.tick()
        self._record_execution_events(events)
        self._after_tick(events)
        return events

    def _record_execution_events(self, events: list[sim.ExecutionEvent]) -> None:
        for event in events:
            self._journal(EVENT_EXECUTION, event.to_dict())

    def _after_tick(self, events: list[sim.ExecutionEvent]) -> None:
        assert self.execution is not None
        self.positions = self.execution.positions
        blocked = [e for e in events if e.kind == sim.BLOCKED_EVENT]
        if blocked:
            for event in blocked:
                self._append(EXECUTOR, sim.failure_report(self.execution, event))
            self.execution = None
            self._set_phase(SessionPhase.DISCUSSION, "replan")
        elif self.execution.all_complete:
            self.execution = None
            self._set_phase(SessionPhase.COMPLETED, "all_plans_complete")

    def abort(self, reason: str) -> None:
        """Terminal stop, allowed from any live phase."""
        if self.phase is SessionPhase.ABORTED:
            raise WrongPhaseError("abort", self.phase.value)
        self._append(SYSTEM, f"session aborted: {reason}")
        if self.phase is SessionPhase.EXECUTING and self.execution is not None:
            self.positions = self.execution.positions
        self.execution = None
        self._set_phase(SessionPhase.ABORTED, "aborted")


def _critique(report: ValidationReport) -> str:
    lines = ["The proposed plans were rejected:"]
    for agent in report.missing_agents:
        lines.append(f"- {agent}: no PLAN line was stated.")
    for agent, agent_report in report.per_agent.items():
        for violation in agent_report.violations:
            if isinstance(violation, UnknownRoom):
                lines.append(
                    f"- {agent}: room {violation.room} (step {violation.index}) is not on the map."
                )
            elif isinstance(violation, NonAdjacent):
                lines.append(
                    f"- {agent}: {violation.from_room} -> {violation.to_room} "
                    f"(step {violation.index}) is not a connection on the map."
                )
            elif isinstance(violation, EmptyPath):
                lines.append(f"- {agent}: the route is empty.")
        if agent_report.start_mismatch is not None:
            mismatch = agent_report.start_mismatch
            lines.append(
                f"- {agent}: route starts in {mismatch.found} but the robot is in "
                f"{mismatch.expected}."
            )
    lines.append("State corrected PLAN lines for every agent, then call @supervisor again.")
    return "\n".join(lines)


def create_session(config: SessionConfig, provider=None) -> Session:
    return Session(config, provider)


# --- persistence ---------------------------------------------------------------


class SessionStore:
    """One JSON-lines file per session: a header line, then one message per
    line. The header's config hash and message count make truncation and
    tampering detectable."""

    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(
            data_dir if data_dir is not None else os.environ.get(DATA_DIR_ENV, "parley-sessions")
        )

    def path_for(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def persist(self, session: Session) -> Path:
        header = {
            "kind": "header",
            "id": session.id,
            "phase": session.phase.value,
            "positions": dict(session.positions),
            "rounds_used": session.rounds_used,
            "plan": session.plan,
            "roster": [p.name for p in session.roster],
            "environment": session.config.environment,
            "config": session.config.to_document(),
            "config_hash": config_hash(session.config),
            "execution": None if session.execution is None else session.execution.to_dict(),
            "message_count": len(session.transcript),
        }
        lines = [json.dumps(header, separators=(",", ":"), sort_keys=True)]
        lines.extend(
            json.dumps({"kind": "message", **m.to_dict()}, separators=(",", ":"), sort_keys=True)
            for m in session.transcript
        )
        path = self.path_for(session.id)
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        except OSError as exc:
            raise StorageUnavailableError(str(exc)) from exc
        return path

    def restore(self, session_id: str) -> Session:
        path = self.path_for(session_id)
        if not path.exists():
            raise UnknownSessionError(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageUnavailableError(str(exc)) from exc
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except ValueError as exc:
                raise CorruptRecordError(f"line {lineno} is not valid JSON") from exc
        if not records or records[0].get("kind") != "header":
            raise CorruptRecordError("missing header line")
        header = records[0]
        messages = records[1:]
        if len(messages) != header.get("message_count"):
            raise CorruptRecordError(
                f"expected {header.get('message_count')} messages, found {len(messages)}"
            )
        config = SessionConfig.from_document(header["config"])
        if config_hash(config) != header.get("config_hash"):
            raise CorruptRecordError("config hash mismatch")
        session = Session(config)
        session.id = header["id"]
        for index, record in enumerate(messages):
            if record.get("kind") != "message" or record.get("seq") != index:
                raise CorruptRecordError(f"message {index} out of sequence")
            session.transcript.append(Author.from_dict(record["author"]), record["body"])
        session.phase = SessionPhase(header["phase"])
        session.positions = dict(header["positions"])
        session.rounds_used = int(header["rounds_used"])
        session.plan = header.get("plan")
        if header.get("execution") is not None:
            session.execution = sim.ExecutionState.from_dict(
                header["execution"], session.graph, config.execution
            )
        return session
