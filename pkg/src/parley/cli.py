"""Headless driver: scripted end-to-end runs, environment/plan validation,
standalone simulation, transcript replay, and the HTTP server.

Exit codes are stable: 0 success, 1 validation or plan failure, 2 usage or
config error, 3 provider or runtime error. Failure paths print exactly one
JSON line to standard error; traces go to standard output as JSON lines.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import envgraph, planex, sim
from .errors import (
    ConfigError,
    EmptyBodyError,
    EmptyEnvironmentError,
    EnvSyntaxError,
    MissingPlanError,
    ParleyError,
    SelfLoopError,
    UnknownRoomError,
)
from .dialogue import Author, Transcript
from .gateway import BIND_ENV, DEFAULT_BIND
from .mission import (
    EVENT_ERROR,
    Session,
    SessionConfig,
    SessionPhase,
    create_session,
)
from .provider import ScriptedProvider

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

DEFAULT_MAX_STEPS = 256


def _fail(code: str, **fields) -> None:
    print(json.dumps({"error": code, **fields}, separators=(",", ":")), file=sys.stderr)


def _emit(record: dict, timestamps: bool) -> None:
    if timestamps:
        record = {**record, "ts": time.time()}
    print(json.dumps(record, separators=(",", ":")), flush=True)


class _TraceWriter:
    """Prints journal records as they appear, exactly once each."""

    def __init__(self, session: Session, timestamps: bool):
        self.session = session
        self.timestamps = timestamps
        self.cursor = 0

    def flush(self) -> list:
        new = self.session.journal[self.cursor:]
        for event in new:
            _emit(event.to_dict(), self.timestamps)
        self.cursor = len(self.session.journal)
        return new


def _read_json(path: str, code: str) -> dict | None:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        _fail(code, path=path, detail=str(exc))
        return None
    except ValueError as exc:
        _fail(code, path=path, detail=f"not valid JSON: {exc}")
        return None


# --- run -------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    document = _read_json(args.config, "config_unreadable")
    if document is None:
        return EXIT_USAGE
    try:
        provider = ScriptedProvider.from_file(args.script)
    except OSError as exc:
        _fail("script_not_found", path=args.script, detail=str(exc))
        return EXIT_USAGE
    try:
        config = SessionConfig.from_document(document)
        session = create_session(config, provider)
    except (ConfigError, EnvSyntaxError, SelfLoopError, EmptyEnvironmentError,
            UnknownRoomError) as exc:
        _fail("config_invalid", detail=str(exc))
        return EXIT_USAGE
    trace = _TraceWriter(session, args.timestamps)
    auto_approve = args.auto_approve or config.auto_approve
    try:
        session.submit_task(args.task)
    except EmptyBodyError:
        trace.flush()
        _fail("empty_task")
        return EXIT_USAGE
    trace.flush()
    for _ in range(args.max_steps):
        if session.phase is SessionPhase.DISCUSSION:
            session.advance_discussion()
            new = trace.flush()
            if any(e.type == EVENT_ERROR and e.payload.get("code") == "provider_error"
                   for e in new):
                _fail("provider_error")
                return EXIT_RUNTIME
        elif session.phase is SessionPhase.AWAITING_APPROVAL:
            if not auto_approve:
                return EXIT_OK  # paused at the human gate
            report = session.approve()
            trace.flush()
            if not report.ok:
                _fail("plan_invalid", missing=report.missing_agents)
                return EXIT_VALIDATION
        elif session.phase is SessionPhase.EXECUTING:
            session.step_execution()
            trace.flush()
        elif session.phase is SessionPhase.COMPLETED:
            return EXIT_OK
        else:  # aborted
            _fail("session_aborted")
            return EXIT_RUNTIME
    if session.phase is SessionPhase.COMPLETED:
        return EXIT_OK
    _fail("step_limit", max_steps=args.max_steps, phase=session.phase.value)
    return EXIT_RUNTIME


# --- validate-env ------------------------------------------------------------


def cmd_validate_env(args: argparse.Namespace) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail("env_unreadable", path=args.path, detail=str(exc))
        return EXIT_USAGE
    try:
        graph = envgraph.parse_environment(text)
    except EnvSyntaxError as exc:
        _fail("env_syntax", line=exc.line, detail=exc.detail)
        return EXIT_VALIDATION
    except SelfLoopError as exc:
        _fail("env_self_loop", line=exc.line, room=exc.room)
        return EXIT_VALIDATION
    except EmptyEnvironmentError:
        _fail("env_empty")
        return EXIT_VALIDATION
    print(json.dumps(
        {"rooms": list(graph.rooms), "edges": [list(e) for e in graph.edges]},
        separators=(",", ":"),
    ))
    return EXIT_OK


# --- validate-plans ------------------------------------------------------------


def _load_graph(path: str) -> envgraph.RoomGraph | None:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail("env_unreadable", path=path, detail=str(exc))
        return None
    try:
        return envgraph.parse_environment(text)
    except (EnvSyntaxError, SelfLoopError, EmptyEnvironmentError) as exc:
        _fail("env_invalid", detail=str(exc))
        return None


def _load_plans(path: str) -> dict[str, list[str]] | None:
    document = _read_json(path, "plans_unreadable")
    if document is None:
        return None
    if not isinstance(document, dict) or not all(
        isinstance(v, list) and all(isinstance(r, str) for r in v) for v in document.values()
    ):
        _fail("plans_invalid", detail="expected an object mapping agent to a list of rooms")
        return None
    return document


def cmd_validate_plans(args: argparse.Namespace) -> int:
    graph = _load_graph(args.env)
    if graph is None:
        return EXIT_USAGE
    plans = _load_plans(args.plans)
    if plans is None:
        return EXIT_USAGE
    if args.positions:
        try:
            positions = json.loads(args.positions)
        except ValueError as exc:
            _fail("positions_invalid", detail=str(exc))
            return EXIT_USAGE
    else:
        positions = {agent: path[0] for agent, path in plans.items() if path}
    report = planex.validate_plan_set(plans, graph, positions)
    print(json.dumps(report.to_dict(), separators=(",", ":")))
    if report.ok:
        return EXIT_OK
    _fail("plan_invalid", missing=report.missing_agents)
    return EXIT_VALIDATION


# --- simulate -------------------------------------------------------------------


def _parse_blocks(specs: list[str]) -> list[sim.BlockEdge] | None:
    blocks = []
    for spec in specs:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            _fail("bad_block", spec=spec, detail="expected ROOM:ROOM[:FROM_TICK]")
            return None
        try:
            from_tick = int(parts[2]) if len(parts) == 3 else 0
            blocks.append(sim.BlockEdge(parts[0], parts[1], from_tick))
        except (ValueError, ConfigError) as exc:
            _fail("bad_block", spec=spec, detail=str(exc))
            return None
    return blocks


def cmd_simulate(args: argparse.Namespace) -> int:
    graph = _load_graph(args.env)
    if graph is None:
        return EXIT_USAGE
    plans = _load_plans(args.plans)
    if plans is None:
        return EXIT_USAGE
    blocks = _parse_blocks(args.block)
    if blocks is None:
        return EXIT_USAGE
    positions = {agent: path[0] for agent, path in plans.items() if path}
    report = planex.validate_plan_set(plans, graph, positions)
    if not report.ok:
        print(json.dumps(report.to_dict(), separators=(",", ":")))
        _fail("plan_invalid", missing=report.missing_agents)
        return EXIT_VALIDATION
    try:
        config = sim.ExecutionConfig(ticks_per_edge=args.ticks_per_edge, failures=tuple(blocks))
        state = sim.start_execution(plans, graph, config)
    except (ConfigError, ParleyError) as exc:
        _fail("simulation_rejected", detail=str(exc))
        return EXIT_VALIDATION
    for event in state.events:
        _emit(event.to_dict(), args.timestamps)
    ticks = 0
    while not state.all_complete and state.has_active_robots():
        if ticks >= args.max_ticks:
            _fail("tick_limit", max_ticks=args.max_ticks)
            return EXIT_RUNTIME
        for event in state.tick():
            _emit(event.to_dict(), args.timestamps)
        ticks += 1
    if state.all_complete:
        return EXIT_OK
    _fail("execution_blocked", positions=state.positions)
    return EXIT_VALIDATION


# --- replay ------------------------------------------------------------------------


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail("record_unreadable", path=args.path, detail=str(exc))
        return EXIT_USAGE
    header = None
    message_records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError:
            _fail("record_corrupt", line=lineno)
            return EXIT_VALIDATION
        if record.get("kind") == "header":
            header = record
        elif "body" in record:
            message_records.append(record)
    if header is not None:
        roster = header.get("roster", [])
    else:
        roster = []
        for record in message_records:
            author = record.get("author", {})
            if author.get("kind") == "agent" and author.get("name") not in roster:
                roster.append(author["name"])
    if not roster:
        _fail("no_agents", detail="record names no agents")
        return EXIT_VALIDATION
    transcript = Transcript(roster)
    for record in message_records:
        transcript.append(Author.from_dict(record["author"]), record["body"])
    try:
        plans = planex.extract_plan_set(transcript, roster)
    except MissingPlanError as exc:
        print(json.dumps(
            {"missing": exc.missing, "partial": exc.partial}, separators=(",", ":")
        ))
        _fail("missing_plans", agents=exc.missing)
        return EXIT_VALIDATION
    print(json.dumps({"plans": plans}, separators=(",", ":")))
    return EXIT_OK


# --- serve --------------------------------------------------------------------------


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .gateway import app

    bind = args.bind or os.environ.get(BIND_ENV, DEFAULT_BIND)
    host, _, port_text = bind.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        _fail("bad_bind", bind=bind)
        return EXIT_USAGE
    uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="info")
    return EXIT_OK


# --- entry point -----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # keep failure output machine-readable
        _fail("usage", detail=message)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parley", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="drive a scripted session end to end")
    run.add_argument("--config", required=True, help="session config JSON")
    run.add_argument("--script", required=True, help="scripted responses ('---' separated)")
    run.add_argument("--task", required=True, help="the supervisor's task text")
    run.add_argument("--auto-approve", action="store_true", dest="auto_approve")
    run.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS, dest="max_steps")
    run.add_argument("--timestamps", action="store_true")
    run.set_defaults(func=cmd_run)

    validate_env = sub.add_parser("validate-env", help="check an environment DSL file")
    validate_env.add_argument("path")
    validate_env.set_defaults(func=cmd_validate_env)

    validate_plans = sub.add_parser("validate-plans", help="check a plans document")
    validate_plans.add_argument("--env", required=True)
    validate_plans.add_argument("--plans", required=True)
    validate_plans.add_argument("--positions", help="JSON object: agent -> current room")
    validate_plans.set_defaults(func=cmd_validate_plans)

    simulate = sub.add_parser("simulate", help="execute a plans document on the simulator")
    simulate.add_argument("--env", required=True)
    simulate.add_argument("--plans", required=True)
    simulate.add_argument("--ticks-per-edge", type=int, default=1, dest="ticks_per_edge")
    simulate.add_argument("--block", action="append", default=[],
                          help="ROOM:ROOM[:FROM_TICK]; repeatable")
    simulate.add_argument("--max-ticks", type=int, default=10000, dest="max_ticks")
    simulate.add_argument("--timestamps", action="store_true")
    simulate.set_defaults(func=cmd_simulate)

    replay = sub.add_parser("replay", help="re-extract plans from a stored transcript")
    replay.add_argument("path")
    replay.set_defaults(func=cmd_replay)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--bind", help=f"HOST:PORT (default ${BIND_ENV} or {DEFAULT_BIND})")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParleyError as exc:
        _fail("runtime", detail=str(exc))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
