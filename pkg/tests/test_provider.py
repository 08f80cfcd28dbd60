"""Completion backend tests: scripted determinism, history truncation, and
the remote backend against a local stub server (including a stalling one)."""

from __future__ import annotations

import json
import random
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from parley.dialogue import Author, Transcript, project_view
from parley.errors import (
    AuthMissingError,
    CompletionTimeoutError,
    MalformedResponseError,
    RemoteStatusError,
    ScriptExhaustedError,
)
from parley.provider import (
    CompletionParams,
    ProviderMessage,
    RemoteProvider,
    ScriptedProvider,
    parse_script,
    system_over_budget,
    truncate_history,
)

PARAMS = CompletionParams(timeout_seconds=1.0)


def _request(*contents: str) -> list[ProviderMessage]:
    messages = [ProviderMessage("system", "sys")]
    messages.extend(ProviderMessage("user", c) for c in contents)
    return messages


# --- scripted backend -----------------------------------------------------------


def test_scripted_replays_in_order_then_exhausts():
    provider = ScriptedProvider(["Alpha: hi", "Bravo: yo"])
    assert provider.complete(_request("x"), PARAMS) == "Alpha: hi"
    assert provider.complete(_request("y"), PARAMS) == "Bravo: yo"
    with pytest.raises(ScriptExhaustedError):
        provider.complete(_request("z"), PARAMS)


def test_scripted_is_deterministic():
    outputs = []
    for _ in range(2):
        provider = ScriptedProvider(["a", "b", "c"])
        outputs.append([provider.complete(_request(), PARAMS) for _ in range(3)])
    assert outputs[0] == outputs[1]


def test_scripted_truncates_to_max_response_chars():
    provider = ScriptedProvider(["x" * 100])
    params = CompletionParams(max_response_chars=10)
    assert provider.complete(_request(), params) == "x" * 10


def test_scripted_records_the_exact_projected_view():
    transcript = Transcript(["Alpha", "Bravo"])
    transcript.append(Author.agent("Alpha"), "Alpha: mine")
    transcript.append(Author.agent("Bravo"), "Bravo: theirs")
    view = project_view(transcript, "Alpha", "sys prompt")
    provider = ScriptedProvider(["ok"])
    provider.complete(view, PARAMS)
    assert provider.calls == [view]


def test_scripted_requires_leading_system_message():
    provider = ScriptedProvider(["ok"])
    with pytest.raises(ValueError):
        provider.complete([ProviderMessage("user", "x")], PARAMS)


def test_parse_script_splits_on_separator_lines():
    text = "first reply\nsecond line\n---\nsecond reply\n---\n\n---\nthird\n"
    assert parse_script(text) == ["first reply\nsecond line", "second reply", "third"]


# --- params ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"temperature": -0.1},
        {"temperature": 2.5},
        {"max_response_chars": 0},
        {"timeout_seconds": 0},
        {"history_char_budget": 0},
    ],
)
def test_params_bounds(kwargs):
    with pytest.raises(ValueError):
        CompletionParams(**kwargs)


# --- truncation --------------------------------------------------------------------


def test_truncation_keeps_system_plus_fitting_suffix():
    messages = [
        ProviderMessage("system", "s" * 10),
        ProviderMessage("user", "u" * 10),
        ProviderMessage("assistant", "a" * 10),
    ]
    assert truncate_history(messages, 15) == [messages[0], messages[2]]


def test_truncation_is_identity_when_budget_covers_everything():
    messages = _request("abc", "defg")
    assert truncate_history(messages, 1000) == messages


def test_truncation_subsequence_property_on_random_lists():
    rng = random.Random(5)
    for _ in range(200):
        messages = [ProviderMessage("system", "s" * rng.randint(1, 30))]
        for _ in range(rng.randint(0, 12)):
            role = rng.choice(["user", "assistant"])
            messages.append(ProviderMessage(role, "m" * rng.randint(1, 30)))
        budget = rng.randint(1, 120)
        kept = truncate_history(messages, budget)
        assert kept[0] == messages[0]
        iterator = iter(messages)
        assert all(m in iterator for m in kept)  # subsequence, order preserved
        assert sum(len(m.content) for m in kept[1:]) <= budget
        if len(messages) > 1 and len(messages[-1].content) <= budget:
            assert kept[-1] == messages[-1]


def test_system_over_budget_flag():
    messages = [ProviderMessage("system", "x" * 50)]
    assert system_over_budget(messages, 10)
    assert not system_over_budget(messages, 100)


# --- remote backend ------------------------------------------------------------------


class _StubHandler(BaseHTTPRequestHandler):
    behavior = "ok"
    seen: list[dict] = []

    def do_POST(self):  # noqa: N802  (http.server naming)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        type(self).seen.append(
            {"body": body, "auth": self.headers.get("Authorization", "")}
        )
        if type(self).behavior == "stall":
            time.sleep(3.0)
        if type(self).behavior == "error500":
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"boom")
            return
        if type(self).behavior == "garbage":
            payload = b"{\"nope\": true}"
        else:
            payload = json.dumps(
                {"choices": [{"message": {"content": "stub says hi"}}]}
            ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.behavior = "ok"
    _StubHandler.seen = []
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()


def test_remote_requires_credentials_before_any_network():
    provider = RemoteProvider(endpoint="http://127.0.0.1:1/unreachable", api_key=None)
    with pytest.raises(AuthMissingError):
        provider.complete(_request("x"), PARAMS)


def test_remote_round_trip_and_wire_format(stub_server):
    provider = RemoteProvider(endpoint=stub_server, api_key="sekret")
    reply = provider.complete(_request("ping"), CompletionParams(temperature=0.5))
    assert reply == "stub says hi"
    seen = _StubHandler.seen[0]
    assert seen["auth"] == "Bearer sekret"
    assert seen["body"]["model"] == "gpt-4-vision-preview"
    assert seen["body"]["temperature"] == 0.5
    assert seen["body"]["messages"][0] == {"role": "system", "content": "sys"}


def test_remote_timeout_is_enforced_and_retried_once(stub_server):
    _StubHandler.behavior = "stall"
    provider = RemoteProvider(endpoint=stub_server, api_key="k", retry_backoff_seconds=0.05)
    params = CompletionParams(timeout_seconds=0.3)
    started = time.monotonic()
    with pytest.raises(CompletionTimeoutError):
        provider.complete(_request("x"), params)
    elapsed = time.monotonic() - started
    assert elapsed < 2.0  # two attempts at 0.3 s plus backoff, never the full stall
    assert len(_StubHandler.seen) == 2


def test_remote_5xx_retried_then_raised(stub_server):
    _StubHandler.behavior = "error500"
    provider = RemoteProvider(endpoint=stub_server, api_key="k", retry_backoff_seconds=0.01)
    with pytest.raises(RemoteStatusError) as exc:
        provider.complete(_request("x"), PARAMS)
    assert exc.value.code == 500
    assert len(_StubHandler.seen) == 2


def test_remote_malformed_response(stub_server):
    _StubHandler.behavior = "garbage"
    provider = RemoteProvider(endpoint=stub_server, api_key="k")
    with pytest.raises(MalformedResponseError):
        provider.complete(_request("x"), PARAMS)
