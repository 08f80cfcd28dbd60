"""Supervised multi-robot mission planning through multi-agent debate.

Language-model-backed agents discuss a task over a shared name-tagged
transcript, commit per-agent room routes as PLAN lines, and a human
supervisor approves before a simulated fleet executes them; blocked routes
feed back into the conversation for replanning.
"""

from .envgraph import (
    RoomGraph,
    parse_environment,
    render_flowchart,
    shortest_path,
    validate_path,
)
from .persona import AgentProfile, build_system_message, default_debate_guidance
from .dialogue import (
    Author,
    Message,
    RoundRobin,
    Transcript,
    detect_supervisor_call,
    next_speaker,
    project_view,
)
from .provider import (
    CompletionParams,
    ProviderMessage,
    RemoteProvider,
    ScriptedProvider,
    truncate_history,
)
from .planex import extract_plan_blocks, extract_plan_set, validate_plan_set
from .sim import BlockEdge, ExecutionConfig, failure_report, start_execution
from .mission import (
    Session,
    SessionConfig,
    SessionPhase,
    SessionStore,
    create_session,
)

__version__ = "0.1.0"

__all__ = [
    "AgentProfile",
    "Author",
    "BlockEdge",
    "CompletionParams",
    "ExecutionConfig",
    "Message",
    "ProviderMessage",
    "RemoteProvider",
    "RoomGraph",
    "RoundRobin",
    "ScriptedProvider",
    "Session",
    "SessionConfig",
    "SessionPhase",
    "SessionStore",
    "Transcript",
    "build_system_message",
    "create_session",
    "default_debate_guidance",
    "detect_supervisor_call",
    "extract_plan_blocks",
    "extract_plan_set",
    "failure_report",
    "next_speaker",
    "parse_environment",
    "project_view",
    "render_flowchart",
    "shortest_path",
    "start_execution",
    "truncate_history",
    "validate_path",
    "validate_plan_set",
]
