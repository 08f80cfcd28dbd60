"""Extraction of committed room routes from the conversation.

Agents (or the supervisor) commit routes with one PLAN line per agent:

    PLAN Alpha: Kitchen -> Hall -> Office

The keyword is case-insensitive, the clause may follow other text on the
line (name tags usually precede it), and must run to the end of the line so
a route is never silently cut short by trailing prose.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .envgraph import RoomGraph, PathViolation, validate_path, violation_to_dict
from .errors import MissingPlanError, UnknownRoomError

logger = logging.getLogger(__name__)

_TOKEN = r"[A-Za-z][A-Za-z0-9_-]{0,63}"
_PLAN_LINE_RE = re.compile(
    rf"\bPLAN\s+({_TOKEN})\s*:\s*({_TOKEN}(?:\s*->\s*{_TOKEN})*)\s*\Z",
    re.IGNORECASE,
)
_PLAN_KEYWORD_RE = re.compile(r"\bPLAN\b", re.IGNORECASE)

PlanSet = dict[str, list[str]]


@dataclass(frozen=True)
class PlanBlock:
    agent: str
    path: tuple[str, ...]


@dataclass(frozen=True)
class StartMismatch:
    expected: str  # the agent's current room
    found: str  # the route's first room


@dataclass
class AgentPlanReport:
    violations: list[PathViolation] = field(default_factory=list)
    start_mismatch: StartMismatch | None = None

    @property
    def ok(self) -> bool:
        return not self.violations and self.start_mismatch is None


@dataclass
class ValidationReport:
    ok: bool
    per_agent: dict[str, AgentPlanReport]
    missing_agents: list[str]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "missing_agents": list(self.missing_agents),
            "per_agent": {
                agent: {
                    "violations": [violation_to_dict(v) for v in report.violations],
                    "start_mismatch": (
                        None
                        if report.start_mismatch is None
                        else {
                            "expected": report.start_mismatch.expected,
                            "found": report.start_mismatch.found,
                        }
                    ),
                }
                for agent, report in self.per_agent.items()
            },
        }


def extract_plan_blocks(body: str) -> list[PlanBlock]:
    """All well-formed PLAN lines in a message body, in order of appearance.

    Lines that mention PLAN but do not parse are ignored (logged at debug),
    never fatal: the approval gate reports missing plans later.
    """
    blocks: list[PlanBlock] = []
    for line in body.splitlines():
        match = _PLAN_LINE_RE.search(line)
        if match:
            agent = match.group(1)
            rooms = tuple(room.strip() for room in match.group(2).split("->"))
            blocks.append(PlanBlock(agent, rooms))
        elif _PLAN_KEYWORD_RE.search(line):
            logger.debug("ignored malformed PLAN-like line: %r", line)
    return blocks


def extract_plan_set(transcript, roster: Sequence[str]) -> PlanSet:
    """Resolve the most recent PLAN line per roster agent.

    Scans newest to oldest; any author may state a plan (the supervisor can
    dictate one). Raises MissingPlanError, carrying the partial result, when
    an agent never stated a plan.
    """
    if not roster:
        raise ValueError("roster is empty")
    wanted = {name.lower(): name for name in roster}
    found: dict[str, list[str]] = {}
    for message in reversed(transcript.messages):
        if len(found) == len(wanted):
            break
        for block in reversed(extract_plan_blocks(message.body)):
            key = block.agent.lower()
            if key in wanted and key not in found:
                found[key] = list(block.path)
    missing = [wanted[key] for key in wanted if key not in found]
    partial = {wanted[key]: path for key, path in found.items()}
    if missing:
        raise MissingPlanError(missing, partial)
    return {wanted[key]: found[key] for key in wanted}


def validate_plan_set(
    plans: Mapping[str, Sequence[str]],
    graph: RoomGraph,
    positions: Mapping[str, str],
) -> ValidationReport:
    """Gate a plan set before execution.

    Per agent: path violations from the graph, plus a start mismatch when the
    route does not begin in the agent's current room. Agents present in
    positions but absent from the plans are reported missing.
    """
    per_agent: dict[str, AgentPlanReport] = {}
    for agent, path in plans.items():
        report = AgentPlanReport(violations=validate_path(graph, path))
        position = _position_for(positions, agent)
        if path and position is not None and path[0].lower() != position.lower():
            report.start_mismatch = StartMismatch(expected=position, found=path[0])
        per_agent[agent] = report
    plan_keys = {agent.lower() for agent in plans}
    missing = [agent for agent in positions if agent.lower() not in plan_keys]
    ok = not missing and all(report.ok for report in per_agent.values())
    return ValidationReport(ok=ok, per_agent=per_agent, missing_agents=missing)


def _position_for(positions: Mapping[str, str], agent: str) -> str | None:
    if agent in positions:
        return positions[agent]
    lowered = agent.lower()
    for name, room in positions.items():
        if name.lower() == lowered:
            return room
    return None


def resolve_plan_set(plans: Mapping[str, Sequence[str]], graph: RoomGraph) -> PlanSet:
    """Rewrite every room in every path to its stored-case graph spelling."""
    resolved: PlanSet = {}
    for agent, path in plans.items():
        rooms = []
        for room in path:
            stored = graph.resolve(room)
            if stored is None:
                raise UnknownRoomError(room)
            rooms.append(stored)
        resolved[agent] = rooms
    return resolved
