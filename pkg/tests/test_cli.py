"""CLI tests: end-to-end scripted runs, the validators, the standalone
simulator, replay, and the exit-code contract."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from parley.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def run_cli(capsys, *argv) -> tuple[int, list[dict], list[dict]]:
    """Run main() in-process; returns (exit, stdout records, stderr records)."""
    code = main(list(argv))
    captured = capsys.readouterr()
    out = [json.loads(line) for line in captured.out.splitlines() if line.strip()]
    err = [json.loads(line) for line in captured.err.splitlines() if line.strip()]
    return code, out, err


def run_happy(capsys, *extra) -> tuple[int, list[dict], list[dict]]:
    return run_cli(
        capsys,
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(FIXTURES / "happy.script.txt"),
        "--task", "Collect the cups left in the Hall after lunch.",
        "--auto-approve",
        *extra,
    )


# --- run ---------------------------------------------------------------------


def test_run_happy_path_completes(capsys):
    code, out, err = run_happy(capsys)
    assert code == 0
    assert err == []
    assert out[-1]["type"] == "phase_changed"
    assert out[-1]["payload"]["phase"] == "completed"
    phases = [r["payload"]["phase"] for r in out if r["type"] == "phase_changed"]
    assert phases == ["discussion", "awaiting_approval", "executing", "completed"]
    messages = [r for r in out if r["type"] == "message_appended"]
    assert len(messages) == 7  # task + six scripted replies


def test_run_trace_is_byte_identical(capsys):
    first = main([
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(FIXTURES / "happy.script.txt"),
        "--task", "Collect the cups left in the Hall after lunch.",
        "--auto-approve",
    ])
    out_a = capsys.readouterr().out
    second = main([
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(FIXTURES / "happy.script.txt"),
        "--task", "Collect the cups left in the Hall after lunch.",
        "--auto-approve",
    ])
    out_b = capsys.readouterr().out
    assert (first, second) == (0, 0)
    assert out_a.encode() == out_b.encode()


def test_run_replan_loop(capsys):
    code, out, err = run_cli(
        capsys,
        "run",
        "--config", str(FIXTURES / "replan.config.json"),
        "--script", str(FIXTURES / "replan.script.txt"),
        "--task", "Collect every bin.",
        "--auto-approve",
    )
    assert code == 0
    replans = [
        r for r in out
        if r["type"] == "phase_changed" and r["payload"]["reason"] == "replan"
    ]
    assert len(replans) == 1
    blocked = [r for r in out if r["type"] == "execution_event" and r["payload"]["kind"] == "blocked"]
    assert len(blocked) == 1
    assert blocked[0]["payload"]["from"] == "Hall"
    assert blocked[0]["payload"]["to"] == "Office"
    failure_messages = [
        r for r in out
        if r["type"] == "message_appended"
        and r["payload"]["message"]["author"]["kind"] == "executor"
        and "blocked" in r["payload"]["message"]["body"]
    ]
    assert len(failure_messages) == 1
    assert out[-1]["payload"]["phase"] == "completed"


def test_run_missing_plan_exits_one_with_critique(capsys):
    code, out, err = run_cli(
        capsys,
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(FIXTURES / "missing-plan.script.txt"),
        "--task", "Tidy the Hall.",
        "--auto-approve",
    )
    assert code == 1
    assert err == [{"error": "plan_invalid", "missing": ["Bravo"]}]
    critiques = [
        r for r in out
        if r["type"] == "message_appended"
        and r["payload"]["message"]["author"]["kind"] == "executor"
        and "Bravo" in r["payload"]["message"]["body"]
    ]
    assert critiques


def test_run_without_auto_approve_pauses_at_the_gate(capsys):
    code, out, err = run_cli(
        capsys,
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(FIXTURES / "happy.script.txt"),
        "--task", "Collect the cups.",
    )
    assert code == 0
    assert out[-1]["payload"]["phase"] == "awaiting_approval"


def test_run_missing_script_file(capsys):
    code, out, err = run_cli(
        capsys,
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(FIXTURES / "nope.script.txt"),
        "--task", "x",
    )
    assert code == 2
    assert err[0]["error"] == "script_not_found"


def test_run_provider_error_exits_three(capsys, tmp_path):
    empty = tmp_path / "empty.script.txt"
    empty.write_text("", encoding="utf-8")
    code, out, err = run_cli(
        capsys,
        "run",
        "--config", str(FIXTURES / "happy.config.json"),
        "--script", str(empty),
        "--task", "Tidy.",
    )
    assert code == 3
    assert err == [{"error": "provider_error"}]
    assert any(r["type"] == "error" for r in out)


def test_run_timestamps_flag_changes_bytes(capsys):
    code, out, _ = run_happy(capsys, "--timestamps")
    assert code == 0
    assert all("ts" in record for record in out)


# --- validate-env ------------------------------------------------------------------


def test_validate_env_ok(capsys):
    code, out, err = run_cli(capsys, "validate-env", str(FIXTURES / "chain.env.txt"))
    assert code == 0
    assert out == [{"rooms": ["Kitchen", "Hall", "Office"],
                    "edges": [["Kitchen", "Hall"], ["Hall", "Office"]]}]


def test_validate_env_self_loop_reports_line(capsys):
    code, out, err = run_cli(capsys, "validate-env", str(FIXTURES / "selfloop.env.txt"))
    assert code == 1
    assert err[0]["error"] == "env_self_loop"
    assert err[0]["line"] == 2


def test_validate_env_missing_file(capsys):
    code, out, err = run_cli(capsys, "validate-env", "no-such.env.txt")
    assert code == 2
    assert err[0]["error"] == "env_unreadable"


# --- validate-plans --------------------------------------------------------------------


def test_validate_plans_ok(capsys):
    code, out, err = run_cli(
        capsys,
        "validate-plans",
        "--env", str(FIXTURES / "chain.env.txt"),
        "--plans", str(FIXTURES / "plans.json"),
    )
    assert code == 0
    assert out[0]["ok"] is True


def test_validate_plans_failure(capsys):
    code, out, err = run_cli(
        capsys,
        "validate-plans",
        "--env", str(FIXTURES / "chain.env.txt"),
        "--plans", str(FIXTURES / "bad-plans.json"),
    )
    assert code == 1
    assert out[0]["ok"] is False
    assert err[0]["error"] == "plan_invalid"


def test_validate_plans_positions_flag(capsys):
    code, out, err = run_cli(
        capsys,
        "validate-plans",
        "--env", str(FIXTURES / "chain.env.txt"),
        "--plans", str(FIXTURES / "plans.json"),
        "--positions", json.dumps({"Alpha": "Hall", "Bravo": "Office"}),
    )
    assert code == 1
    mismatch = out[0]["per_agent"]["Alpha"]["start_mismatch"]
    assert mismatch == {"expected": "Hall", "found": "Kitchen"}


# --- simulate ---------------------------------------------------------------------------


def test_simulate_unblocked_run(capsys):
    code, out, err = run_cli(
        capsys,
        "simulate",
        "--env", str(FIXTURES / "chain.env.txt"),
        "--plans", str(FIXTURES / "plans.json"),
    )
    assert code == 0
    assert out[-1]["kind"] == "all_complete"
    assert out[-1]["tick"] == 2


def test_simulate_blocked_edge_trace_ends_blocked(capsys):
    code, out, err = run_cli(
        capsys,
        "simulate",
        "--env", str(FIXTURES / "chain.env.txt"),
        "--plans", str(FIXTURES / "plans.json"),
        "--block", "Hall:Office:0",
    )
    assert code == 1
    assert out[-1]["kind"] == "blocked"
    assert err[0]["error"] == "execution_blocked"


def test_simulate_rejects_bad_block_flag(capsys):
    code, out, err = run_cli(
        capsys,
        "simulate",
        "--env", str(FIXTURES / "chain.env.txt"),
        "--plans", str(FIXTURES / "plans.json"),
        "--block", "nonsense",
    )
    assert code == 2
    assert err[0]["error"] == "bad_block"


# --- replay ---------------------------------------------------------------------------------


def test_replay_restored_session_record(capsys, tmp_path):
    from parley.mission import SessionStore
    from conftest import make_session

    session = make_session(
        ["Alpha: PLAN Alpha: Kitchen -> Hall\nPLAN Bravo: Office\n@supervisor"]
    )
    session.submit_task("task")
    session.advance_discussion()
    store = SessionStore(tmp_path)
    path = store.persist(session)
    code, out, err = run_cli(capsys, "replay", str(path))
    assert code == 0
    assert out == [{"plans": {"Alpha": ["Kitchen", "Hall"], "Bravo": ["Office"]}}]


def test_replay_reports_missing_plans(capsys, tmp_path):
    from parley.mission import SessionStore
    from conftest import make_session

    session = make_session(["Alpha: no plans from me yet"])
    session.submit_task("task")
    session.advance_discussion()
    store = SessionStore(tmp_path)
    path = store.persist(session)
    code, out, err = run_cli(capsys, "replay", str(path))
    assert code == 1
    assert err[0]["error"] == "missing_plans"
    assert set(err[0]["agents"]) == {"Alpha", "Bravo"}


def test_replay_missing_file(capsys):
    code, out, err = run_cli(capsys, "replay", "no-such-record.jsonl")
    assert code == 2
    assert err[0]["error"] == "record_unreadable"


# --- usage errors -----------------------------------------------------------------------------


def test_unknown_subcommand_is_usage_error(capsys):
    code, out, err = run_cli(capsys, "frobnicate")
    assert code == 2
    assert err[0]["error"] == "usage"


def test_console_script_entry_point_runs():
    result = subprocess.run(
        [sys.executable, "-m", "parley.cli", "validate-env", str(FIXTURES / "chain.env.txt")],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout)["rooms"] == ["Kitchen", "Hall", "Office"]
