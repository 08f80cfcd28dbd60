"""Room-connectivity model: the text map agents plan over and robots traverse.

The environment is written in a line-oriented DSL:

    # comment to end of line
    Kitchen <-> Hall        # undirected connection, declares both rooms
    room Storage            # isolated room

Room names are tokens (letter, then letters/digits/underscore/hyphen, at most
64 characters). Room identity is case-insensitive; the first spelling seen is
the stored form used for display.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import (
    EmptyEnvironmentError,
    EnvSyntaxError,
    SelfLoopError,
    UnknownRoomError,
)

TOKEN_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]{0,63}\Z")

RoomId = str


def is_room_token(text: str) -> bool:
    return bool(TOKEN_RE.match(text))


@dataclass(frozen=True)
class UnknownRoom:
    room: str
    index: int


@dataclass(frozen=True)
class NonAdjacent:
    from_room: str
    to_room: str
    index: int  # position of the second room of the pair


@dataclass(frozen=True)
class EmptyPath:
    pass


PathViolation = UnknownRoom | NonAdjacent | EmptyPath


def violation_to_dict(violation: PathViolation) -> dict:
    if isinstance(violation, UnknownRoom):
        return {"kind": "unknown_room", "room": violation.room, "index": violation.index}
    if isinstance(violation, NonAdjacent):
        return {
            "kind": "non_adjacent",
            "from": violation.from_room,
            "to": violation.to_room,
            "index": violation.index,
        }
    return {"kind": "empty_path"}


class RoomGraph:
    """Immutable set of rooms plus undirected edges, in insertion order.

    Self-loops and duplicate edges are rejected at construction; edge
    endpoints that were never declared are added in first-appearance order,
    mirroring the parser.
    """

    __slots__ = ("_stored", "_edge_list", "_edge_keys", "_adjacency")

    def __init__(self, rooms: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()):
        self._stored: dict[str, str] = {}  # lowercase -> stored spelling
        self._edge_list: list[tuple[str, str]] = []
        self._edge_keys: set[frozenset[str]] = set()
        self._adjacency: dict[str, set[str]] = {}
        for room in rooms:
            self._add_room(room)
        for a, b in edges:
            self._add_edge(a, b, line=None)

    def _add_room(self, room: str, line: int | None = None) -> str:
        if not is_room_token(room):
            raise EnvSyntaxError(line or 0, f"invalid room name {room!r}")
        key = room.lower()
        if key not in self._stored:
            self._stored[key] = room
            self._adjacency[key] = set()
        return key

    def _add_edge(self, a: str, b: str, line: int | None) -> None:
        if a.lower() == b.lower():
            raise SelfLoopError(line, a)
        ka = self._add_room(a, line)
        kb = self._add_room(b, line)
        edge_key = frozenset((ka, kb))
        if edge_key in self._edge_keys:
            return
        self._edge_keys.add(edge_key)
        self._edge_list.append((self._stored[ka], self._stored[kb]))
        self._adjacency[ka].add(kb)
        self._adjacency[kb].add(ka)

    @property
    def rooms(self) -> tuple[str, ...]:
        return tuple(self._stored.values())

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(self._edge_list)

    def has_room(self, room: str) -> bool:
        return room.lower() in self._stored

    def resolve(self, room: str) -> str | None:
        """Stored spelling for a case-insensitive room name, or None."""
        return self._stored.get(room.lower())

    def has_edge(self, a: str, b: str) -> bool:
        return frozenset((a.lower(), b.lower())) in self._edge_keys

    def neighbors(self, room: str) -> tuple[str, ...]:
        """Adjacent rooms in case-insensitive lexicographic order."""
        key = room.lower()
        if key not in self._stored:
            raise UnknownRoomError(room)
        return tuple(self._stored[k] for k in sorted(self._adjacency[key]))

    def isolated_rooms(self) -> tuple[str, ...]:
        return tuple(
            self._stored[key] for key in self._stored if not self._adjacency[key]
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoomGraph):
            return NotImplemented
        return self.rooms == other.rooms and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.rooms, self.edges))

    def __repr__(self) -> str:
        return f"RoomGraph(rooms={list(self.rooms)!r}, edges={self._edge_list!r})"


def parse_environment(text: str) -> RoomGraph:
    """Parse DSL source into a RoomGraph.

    Raises EnvSyntaxError / SelfLoopError with the 1-based offending line,
    or EmptyEnvironmentError when no rooms remain after parsing.
    """
    graph = RoomGraph()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "<->" in line:
            parts = [part.strip() for part in line.split("<->")]
            if len(parts) != 2:
                raise EnvSyntaxError(lineno, "expected exactly one '<->' per line")
            a, b = parts
            if not is_room_token(a) or not is_room_token(b):
                raise EnvSyntaxError(lineno, f"invalid room name in edge {line!r}")
            graph._add_edge(a, b, lineno)
            continue
        fields = line.split()
        if len(fields) == 2 and fields[0].lower() == "room":
            if not is_room_token(fields[1]):
                raise EnvSyntaxError(lineno, f"invalid room name {fields[1]!r}")
            graph._add_room(fields[1], lineno)
            continue
        raise EnvSyntaxError(lineno, f"unrecognized declaration {line!r}")
    if not graph.rooms:
        raise EmptyEnvironmentError()
    return graph


def render_flowchart(graph: RoomGraph) -> str:
    """Render a graph back to DSL text that re-parses to an equal graph.

    Edges come first, isolated rooms after, except when that listing would
    change the first-appearance order of rooms; then every room is declared
    up front so parse(render(g)) reproduces g exactly, insertion order
    included.
    """
    edge_lines = [f"{a} <-> {b}" for a, b in graph.edges]
    natural = edge_lines + [f"room {r}" for r in graph.isolated_rooms()]
    seen: list[str] = []
    for a, b in graph.edges:
        if a not in seen:
            seen.append(a)
        if b not in seen:
            seen.append(b)
    seen.extend(r for r in graph.isolated_rooms() if r not in seen)
    if tuple(seen) == graph.rooms:
        return "\n".join(natural)
    return "\n".join([f"room {r}" for r in graph.rooms] + edge_lines)


def validate_path(graph: RoomGraph, path: Sequence[str]) -> list[PathViolation]:
    """Check a room path against the graph; an empty list means valid.

    Unknown rooms are reported per position; a consecutive pair is checked
    for adjacency only when both ends are known rooms.
    """
    if not path:
        return [EmptyPath()]
    violations: list[PathViolation] = []
    for index, room in enumerate(path):
        if not graph.has_room(room):
            violations.append(UnknownRoom(room, index))
        if index == 0:
            continue
        previous = path[index - 1]
        if (
            graph.has_room(previous)
            and graph.has_room(room)
            and not graph.has_edge(previous, room)
        ):
            violations.append(NonAdjacent(previous, room, index))
    violations.sort(key=_violation_index)
    return violations


def _violation_index(violation: PathViolation) -> tuple[int, int]:
    # UnknownRoom at index i sorts before a NonAdjacent ending at i.
    if isinstance(violation, UnknownRoom):
        return (violation.index, 0)
    if isinstance(violation, NonAdjacent):
        return (violation.index, 1)
    return (0, 0)


def shortest_path(graph: RoomGraph, start: str, goal: str) -> list[str] | None:
    """Minimum-hop path between two rooms, or None when disconnected.

    Breadth-first search expanding neighbors in case-insensitive
    lexicographic order, so ties always resolve the same way.
    """
    start_key = start.lower()
    goal_key = goal.lower()
    for name, key in ((start, start_key), (goal, goal_key)):
        if key not in graph._stored:
            raise UnknownRoomError(name)
    if start_key == goal_key:
        return [graph._stored[start_key]]
    parents: dict[str, str] = {start_key: start_key}
    frontier = [start_key]
    while frontier:
        next_frontier: list[str] = []
        for node in frontier:
            for neighbor in sorted(graph._adjacency[node]):
                if neighbor in parents:
                    continue
                parents[neighbor] = node
                if neighbor == goal_key:
                    return _reconstruct(graph, parents, start_key, goal_key)
                next_frontier.append(neighbor)
        frontier = next_frontier
    return None


def _reconstruct(
    graph: RoomGraph, parents: dict[str, str], start_key: str, goal_key: str
) -> list[str]:
    keys = [goal_key]
    while keys[-1] != start_key:
        keys.append(parents[keys[-1]])
    keys.reverse()
    return [graph._stored[key] for key in keys]
