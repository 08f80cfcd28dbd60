"""Shared fixtures: the chain environment, a two-agent roster, and helpers
for building scripted sessions."""

from __future__ import annotations

import random
import string

import pytest

from parley.envgraph import RoomGraph, parse_environment
from parley.mission import SessionConfig, create_session
from parley.persona import AgentProfile
from parley.provider import ScriptedProvider

CHAIN_ENV = "Kitchen <-> Hall\nHall <-> Office"
TRIANGLE_ENV = "Kitchen <-> Hall\nHall <-> Office\nKitchen <-> Office"


@pytest.fixture
def chain_graph() -> RoomGraph:
    return parse_environment(CHAIN_ENV)


@pytest.fixture
def roster() -> list[AgentProfile]:
    return [
        AgentProfile("Alpha", "A nimble sweeper robot.", "Kitchen"),
        AgentProfile("Bravo", "A bin-carrier robot.", "Office"),
    ]


def make_config(responses: list[str], *, environment: str = CHAIN_ENV, **overrides) -> SessionConfig:
    agents = overrides.pop(
        "agents",
        [
            AgentProfile("Alpha", "A nimble sweeper robot.", "Kitchen"),
            AgentProfile("Bravo", "A bin-carrier robot.", "Office"),
        ],
    )
    return SessionConfig(
        agents=agents,
        environment=environment,
        scripted_responses=responses,
        **overrides,
    )


def make_session(responses: list[str], **overrides):
    config = make_config(responses, **overrides)
    return create_session(config, ScriptedProvider(responses))


def random_room_names(rng: random.Random, count: int) -> list[str]:
    """Distinct (case-insensitively) token-shaped room names."""
    names: list[str] = []
    seen: set[str] = set()
    while len(names) < count:
        length = rng.randint(1, 8)
        name = rng.choice(string.ascii_letters) + "".join(
            rng.choice(string.ascii_letters + string.digits + "_-") for _ in range(length - 1)
        )
        if name.lower() not in seen:
            seen.add(name.lower())
            names.append(name)
    return names


def random_graph(rng: random.Random, max_rooms: int = 10, max_extra_edges: int = 14) -> RoomGraph:
    """Random valid graph; may be disconnected and may have isolated rooms."""
    room_count = rng.randint(1, max_rooms)
    rooms = random_room_names(rng, room_count)
    possible = [
        (rooms[i], rooms[j]) for i in range(room_count) for j in range(i + 1, room_count)
    ]
    rng.shuffle(possible)
    edge_count = rng.randint(0, min(len(possible), max_extra_edges))
    return RoomGraph(rooms, possible[:edge_count])
