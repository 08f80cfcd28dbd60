/**
 * Console wiring: connect to a session, fold the event stream into the view
 * state, forward supervisor actions as plain HTTP posts. A 409 means the
 * button raced a phase change; we toast and re-sync from the snapshot plus
 * a fresh replay.
 */

import { GatewayClient, GatewayError, type ConnectionStatus } from "./gateway.js";
import { applyEvent, initialViewState, rebuildViewState, type ViewState } from "./state.js";
import { grabElements, render, renderStatus, toast } from "./view.js";
import type { GatewayEvent, SessionInfo, Snapshot } from "./types.js";

const els = grabElements(document);
const params = new URLSearchParams(window.location.search);
const gatewayBase = params.get("gateway") ?? "http://127.0.0.1:8787";
const client = new GatewayClient(gatewayBase);

let info: SessionInfo | null = null;
let state: ViewState | null = null;
let closeStream: (() => void) | null = null;
let stepTimer: number | null = null;

function sessionInfoFrom(snapshot: Snapshot): SessionInfo {
  return {
    id: snapshot.id,
    rooms: snapshot.rooms,
    edges: snapshot.edges,
    roster: snapshot.roster,
  };
}

async function connect(sessionId: string): Promise<void> {
  closeStream?.();
  const snapshot = await client.snapshot(sessionId);
  info = sessionInfoFrom(snapshot);
  state = initialViewState(info);
  render(els, info, state);
  closeStream = client.openEvents(sessionId, {
    onEvent: (evt: GatewayEvent) => {
      if (!info || !state) return;
      state = applyEvent(state, info, evt);
      render(els, info, state);
    },
    onStatus: (status: ConnectionStatus) => renderStatus(els, status),
  });
}

/** Drop the view and rebuild from the snapshot + full replay. */
async function resync(): Promise<void> {
  if (!info) return;
  const sessionId = info.id;
  const events = await collectReplay(sessionId);
  state = rebuildViewState(info, events);
  render(els, info, state);
}

async function collectReplay(sessionId: string): Promise<GatewayEvent[]> {
  const snapshot = await client.snapshot(sessionId);
  const events: GatewayEvent[] = [];
  // Pull the replay over fetch; the stream stays open on live sessions, so
  // stop once we have everything the snapshot promised.
  const response = await fetch(client.eventsUrl(sessionId));
  const reader = response.body!.getReader();
  const decoder = new TextDecoder();
  const { SSEParser } = await import("./sse.js");
  const parser = new SSEParser();
  while (events.length < snapshot.event_count) {
    const { done, value } = await reader.read();
    if (done) break;
    events.push(...parser.feed(decoder.decode(value, { stream: true })));
  }
  await reader.cancel().catch(() => undefined);
  return events;
}

async function act(action: () => Promise<unknown>): Promise<void> {
  try {
    await action();
  } catch (error) {
    if (error instanceof GatewayError && error.status === 409) {
      toast(els, `out of sync: ${error.message}`);
      await resync();
    } else {
      toast(els, String(error));
    }
  }
}

els.sendButton.addEventListener("click", () => {
  const text = els.input.value.trim();
  if (!text || !info) return;
  els.input.value = "";
  void act(() => client.sendMessage(info!.id, text));
});

els.approveButton.addEventListener("click", () => {
  if (!info) return;
  void act(() => client.approve(info!.id));
});

els.stepToggle.addEventListener("change", () => {
  if (stepTimer !== null) {
    window.clearInterval(stepTimer);
    stepTimer = null;
  }
  if (els.stepToggle.checked) {
    stepTimer = window.setInterval(() => {
      if (!info || !state) return;
      if (state.phase === "discussion" || state.phase === "executing") {
        void act(() => client.step(info!.id, 1));
      }
    }, 1200);
  }
});

const connectForm = document.getElementById("connect-form") as HTMLFormElement;
connectForm.addEventListener("submit", (event) => {
  event.preventDefault();
  const field = document.getElementById("session-id") as HTMLInputElement;
  const sessionId = field.value.trim();
  if (sessionId) {
    void act(() => connect(sessionId));
  }
});

const initial = params.get("session");
if (initial) {
  (document.getElementById("session-id") as HTMLInputElement).value = initial;
  void act(() => connect(initial));
}
