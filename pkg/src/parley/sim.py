"""Discrete-event stand-in for the robot fleet.

Robots traverse the room graph one edge per ``ticks_per_edge`` ticks. Edge
blockages injected through the config halt the affected robot and surface as
Blocked events, which the session layer turns into replanning rounds. Equal
inputs always produce identical event sequences.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .envgraph import RoomGraph, validate_path, violation_to_dict
from .errors import (
    AlreadyCompleteError,
    ConfigError,
    InvalidPlanSetError,
    NotAFailureError,
)

MOVING = "moving"
BLOCKED = "blocked"
DONE = "done"

DEPART = "depart"
ARRIVE = "arrive"
BLOCKED_EVENT = "blocked"
PLAN_COMPLETE = "plan_complete"
ALL_COMPLETE = "all_complete"


@dataclass(frozen=True)
class BlockEdge:
    a: str
    b: str
    from_tick: int = 0

    def __post_init__(self) -> None:
        if self.from_tick < 0:
            raise ConfigError("from_tick must be non-negative")

    def to_dict(self) -> dict:
        return {"kind": "block_edge", "a": self.a, "b": self.b, "from_tick": self.from_tick}

    @classmethod
    def from_dict(cls, data: Mapping) -> BlockEdge:
        return cls(data["a"], data["b"], int(data.get("from_tick", 0)))


@dataclass(frozen=True)
class ExecutionConfig:
    ticks_per_edge: int = 1
    failures: tuple[BlockEdge, ...] = ()

    def __post_init__(self) -> None:
        if self.ticks_per_edge <= 0:
            raise ConfigError("ticks_per_edge must be positive")
        object.__setattr__(self, "failures", tuple(self.failures))

    def to_dict(self) -> dict:
        return {
            "ticks_per_edge": self.ticks_per_edge,
            "failures": [f.to_dict() for f in self.failures],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ExecutionConfig:
        return cls(
            ticks_per_edge=int(data.get("ticks_per_edge", 1)),
            failures=tuple(BlockEdge.from_dict(f) for f in data.get("failures", ())),
        )


@dataclass(frozen=True)
class ExecutionEvent:
    tick: int
    kind: str
    agent: str | None = None
    from_room: str | None = None
    to_room: str | None = None
    room: str | None = None

    def to_dict(self) -> dict:
        record: dict = {"tick": self.tick, "kind": self.kind}
        if self.agent is not None:
            record["agent"] = self.agent
        if self.from_room is not None:
            record["from"] = self.from_room
        if self.to_room is not None:
            record["to"] = self.to_room
        if self.room is not None:
            record["room"] = self.room
        return record


@dataclass
class RobotState:
    agent: str
    room: str
    remaining: list[str]
    status: str
    progress: int = 0  # ticks already spent on the edge to remaining[0]

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "room": self.room,
            "remaining": list(self.remaining),
            "status": self.status,
            "progress": self.progress,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> RobotState:
        return cls(
            agent=data["agent"],
            room=data["room"],
            remaining=list(data["remaining"]),
            status=data["status"],
            progress=int(data.get("progress", 0)),
        )


class ExecutionState:
    """One fleet run over a plan set. Owned by a single session; not shared."""

    def __init__(self, graph: RoomGraph, robots: list[RobotState], config: ExecutionConfig):
        self.graph = graph
        self.robots = robots
        self.config = config
        self.tick_count = 0
        self.all_complete = False
        self.events: list[ExecutionEvent] = []

    @property
    def positions(self) -> dict[str, str]:
        return {robot.agent: robot.room for robot in self.robots}

    def has_active_robots(self) -> bool:
        return any(robot.status == MOVING for robot in self.robots)

    def _blocked(self, a: str, b: str, tick: int) -> bool:
        key = frozenset((a.lower(), b.lower()))
        return any(
            frozenset((f.a.lower(), f.b.lower())) == key and tick >= f.from_tick
            for f in self.config.failures
        )

    def tick(self) -> list[ExecutionEvent]:
        """Advance one tick; returns the events it produced, in roster order."""
        if self.all_complete:
            raise AlreadyCompleteError()
        self.tick_count += 1
        now = self.tick_count
        emitted: list[ExecutionEvent] = []
        for robot in self.robots:
            if robot.status != MOVING:
                continue
            destination = robot.remaining[0]
            if self._blocked(robot.room, destination, now):
                robot.status = BLOCKED
                robot.progress = 0
                emitted.append(
                    ExecutionEvent(
                        now, BLOCKED_EVENT, robot.agent,
                        from_room=robot.room, to_room=destination,
                    )
                )
                continue
            if robot.progress == 0:
                emitted.append(
                    ExecutionEvent(
                        now, DEPART, robot.agent,
                        from_room=robot.room, to_room=destination,
                    )
                )
            robot.progress += 1
            if robot.progress >= self.config.ticks_per_edge:
                robot.room = destination
                robot.remaining.pop(0)
                robot.progress = 0
                emitted.append(ExecutionEvent(now, ARRIVE, robot.agent, room=destination))
                if not robot.remaining:
                    robot.status = DONE
                    emitted.append(ExecutionEvent(now, PLAN_COMPLETE, robot.agent))
        if all(robot.status == DONE for robot in self.robots) and not self.all_complete:
            self.all_complete = True
            emitted.append(ExecutionEvent(now, ALL_COMPLETE))
        self.events.extend(emitted)
        return emitted

    def to_dict(self) -> dict:
        return {
            "tick": self.tick_count,
            "all_complete": self.all_complete,
            "robots": [robot.to_dict() for robot in self.robots],
        }

    @classmethod
    def from_dict(cls, data: Mapping, graph: RoomGraph, config: ExecutionConfig) -> ExecutionState:
        state = cls(graph, [RobotState.from_dict(r) for r in data["robots"]], config)
        state.tick_count = int(data["tick"])
        state.all_complete = bool(data["all_complete"])
        return state


def start_execution(
    plans: Mapping[str, Sequence[str]], graph: RoomGraph, config: ExecutionConfig
) -> ExecutionState:
    """Place one robot per agent at its route's first room.

    The plan set must already have passed validation; this re-checks the
    graph-level part as a hard gate. Single-room routes complete immediately
    at tick 0.
    """
    if not plans:
        raise InvalidPlanSetError("no plans")
    problems = []
    for agent, path in plans.items():
        for violation in validate_path(graph, path):
            problems.append(f"{agent}: {violation_to_dict(violation)}")
    if problems:
        raise InvalidPlanSetError("; ".join(problems))
    for failure in config.failures:
        if not graph.has_edge(failure.a, failure.b):
            raise ConfigError(f"blocked edge {failure.a} <-> {failure.b} is not on the map")
    robots = []
    for agent, path in plans.items():
        resolved = [graph.resolve(room) or room for room in path]
        robots.append(
            RobotState(
                agent=agent,
                room=resolved[0],
                remaining=resolved[1:],
                status=MOVING if len(resolved) > 1 else DONE,
            )
        )
    state = ExecutionState(graph, robots, config)
    for robot in robots:
        if robot.status == DONE:
            state.events.append(ExecutionEvent(0, PLAN_COMPLETE, robot.agent))
    if all(robot.status == DONE for robot in robots):
        state.all_complete = True
        state.events.append(ExecutionEvent(0, ALL_COMPLETE))
    return state


def failure_report(state: ExecutionState, event: ExecutionEvent) -> str:
    """Human-readable replanning context for a Blocked event.

    Names the stuck agent, the unusable connection, and where every robot is
    now; those rooms are the start positions for the next plan.
    """
    if event.kind != BLOCKED_EVENT:
        raise NotAFailureError(event.kind)
    rooms = "; ".join(f"{robot.agent} is in {robot.room}" for robot in state.robots)
    return (
        f"Problem detected: {event.agent} cannot move from {event.from_room} to "
        f"{event.to_room}; that connection is blocked. Current positions: {rooms}. "
        "Plan new routes starting from these rooms."
    )
