"""Per-agent identity prompts: who the agent is, who else is on the team,
what the map looks like, and how to behave in the debate."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .envgraph import RoomGraph, render_flowchart
from .errors import ProfileNotInRosterError

# Section headers are part of the prompt contract; tests and docs rely on them.
IDENTITY_HEADER = "IDENTITY"
TEAM_HEADER = "TEAM"
MAP_HEADER = "MAP"
RULES_HEADER = "RULES"

SUPERVISOR_CALL_MARKER = "@supervisor"

SystemPrompt = str


@dataclass(frozen=True)
class AgentProfile:
    name: str
    description: str
    start_room: str


_DEFAULT_GUIDANCE = f"""\
You are one robot agent in a team chat that also includes a human supervisor.
Work out, together, which agent visits which rooms to solve the supervisor's task.
Negotiate with your teammates: propose a division of labour, challenge weak
proposals, and point out mistakes instead of politely agreeing with them.
Keep every message short, a few sentences at most.
Start every message with your own name followed by a colon, like "Name: ...".
Only move between rooms that are directly connected on the map, one hop at a time.
When the team has agreed, each agent's final route must be stated on its own
line in exactly this form:
PLAN <agent>: <room> -> <room> -> <room>
A route that stays in one room is a single PLAN line with just that room.
Every agent needs a PLAN line, and each route must start from that agent's
current room. After the PLAN lines are stated, end your final message with
{SUPERVISOR_CALL_MARKER} to call the supervisor over to review the plan."""


def default_debate_guidance() -> str:
    """The fixed debate rules installed in every agent's system prompt."""
    return _DEFAULT_GUIDANCE


def build_system_message(
    profile: AgentProfile,
    roster: Sequence[AgentProfile],
    graph: RoomGraph,
    guidance: str | None = None,
) -> SystemPrompt:
    """Assemble one agent's system prompt.

    Only the identity section differs between agents; team, map, and rules
    blocks are identical across the roster so everyone debates over the same
    shared picture.
    """
    if profile not in roster:
        raise ProfileNotInRosterError(profile.name)
    if guidance is None:
        guidance = default_debate_guidance()
    lines = [
        IDENTITY_HEADER,
        f"You are {profile.name}. {profile.description}",
        "",
        TEAM_HEADER,
    ]
    lines.extend(f"- {member.name}: {member.description}" for member in roster)
    lines.append("Start positions:")
    lines.extend(f"- {member.name} starts in {member.start_room}" for member in roster)
    lines.extend(["", MAP_HEADER, render_flowchart(graph), "", RULES_HEADER, guidance])
    return "\n".join(lines)
