/**
 * DOM rendering. Renders only from ViewState + SessionInfo; every update is
 * a full re-render of the affected panel, driven by stream events (no
 * optimistic paths), so the screen always equals the session log.
 */

import { buildMapModel } from "./layout.js";
import {
  approveEnabled,
  inputModeForPhase,
  sendEnabled,
  stepEnabled,
  type ViewState,
} from "./state.js";
import type { ConnectionStatus } from "./gateway.js";
import type { SessionInfo } from "./types.js";

const MAP_WIDTH = 420;
const MAP_HEIGHT = 320;

const INPUT_PLACEHOLDER: Record<string, string> = {
  task: "Describe the task for the team...",
  advice: "Advise the agents or ask for changes...",
  interrupt: "Interrupt execution with new information...",
};

export interface ConsoleElements {
  phaseBadge: HTMLElement;
  statusBanner: HTMLElement;
  transcript: HTMLElement;
  planPanel: HTMLElement;
  mapPanel: HTMLElement;
  input: HTMLTextAreaElement;
  sendButton: HTMLButtonElement;
  approveButton: HTMLButtonElement;
  stepToggle: HTMLInputElement;
  notices: HTMLElement;
}

export function grabElements(root: Document): ConsoleElements {
  const get = <T extends HTMLElement>(id: string): T => {
    const element = root.getElementById(id);
    if (!element) throw new Error(`missing #${id}`);
    return element as T;
  };
  return {
    phaseBadge: get("phase-badge"),
    statusBanner: get("status-banner"),
    transcript: get("transcript"),
    planPanel: get("plan-panel"),
    mapPanel: get("map-panel"),
    input: get<HTMLTextAreaElement>("supervisor-input"),
    sendButton: get<HTMLButtonElement>("send-button"),
    approveButton: get<HTMLButtonElement>("approve-button"),
    stepToggle: get<HTMLInputElement>("step-toggle"),
    notices: get("notices"),
  };
}

export function render(els: ConsoleElements, info: SessionInfo, state: ViewState): void {
  renderPhase(els, state);
  renderTranscript(els, state);
  renderPlan(els, state);
  renderMap(els, info, state);
  renderNotices(els, state);
}

export function renderStatus(els: ConsoleElements, status: ConnectionStatus): void {
  els.statusBanner.dataset.status = status;
  els.statusBanner.textContent =
    status === "live" ? "live"
    : status === "connecting" ? "connecting..."
    : status === "closed" ? "session ended"
    : "disconnected, retrying...";
}

function renderPhase(els: ConsoleElements, state: ViewState): void {
  els.phaseBadge.textContent = state.phase.replace("_", " ");
  els.phaseBadge.dataset.phase = state.phase;
  const mode = inputModeForPhase(state.phase);
  els.input.disabled = !sendEnabled(state.phase);
  els.input.placeholder = mode ? INPUT_PLACEHOLDER[mode] : "session is over";
  els.input.dataset.mode = mode ?? "none";
  els.sendButton.disabled = !sendEnabled(state.phase);
  els.approveButton.disabled = !approveEnabled(state.phase);
  els.stepToggle.disabled = !stepEnabled(state.phase);
}

function renderTranscript(els: ConsoleElements, state: ViewState): void {
  els.transcript.replaceChildren(
    ...state.transcript.map((message) => {
      const item = document.createElement("li");
      item.className = `msg msg-${message.author.kind}`;
      const avatar = document.createElement("span");
      avatar.className = "avatar";
      avatar.textContent = initials(message.author.name ?? message.author.kind);
      const body = document.createElement("span");
      body.className = "body";
      body.textContent = message.body;
      item.append(avatar, body);
      return item;
    }),
  );
  els.transcript.scrollTop = els.transcript.scrollHeight;
}

function renderPlan(els: ConsoleElements, state: ViewState): void {
  if (state.planRows.length === 0) {
    els.planPanel.replaceChildren(muted("No plan validated yet."));
    return;
  }
  const table = document.createElement("table");
  for (const row of state.planRows) {
    const tr = document.createElement("tr");
    const agent = document.createElement("td");
    agent.textContent = row.agent;
    tr.append(agent);
    const path = document.createElement("td");
    if (row.missing) {
      path.append(bad("no PLAN line"));
    } else {
      row.path.forEach((room, i) => {
        if (i > 0) path.append(document.createTextNode(" -> "));
        path.append(row.roomOk[i] ? ok(room) : bad(room));
      });
      if (row.startMismatch) {
        path.append(bad(` (robot is in ${row.startMismatch.expected})`));
      }
    }
    tr.append(path);
    table.append(tr);
  }
  const heading = document.createElement("div");
  heading.className = state.planOk ? "plan-ok" : "plan-bad";
  heading.textContent = state.planOk ? "Plan valid" : "Plan rejected";
  els.planPanel.replaceChildren(heading, table);
}

function renderMap(els: ConsoleElements, info: SessionInfo, state: ViewState): void {
  const model = buildMapModel(info, state.positions, state.blockedEdges, MAP_WIDTH, MAP_HEIGHT);
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNS, "svg");
  svg.setAttribute("viewBox", `0 0 ${MAP_WIDTH} ${MAP_HEIGHT}`);
  for (const edge of model.edges) {
    const line = document.createElementNS(svgNS, "line");
    line.setAttribute("x1", String(edge.x1));
    line.setAttribute("y1", String(edge.y1));
    line.setAttribute("x2", String(edge.x2));
    line.setAttribute("y2", String(edge.y2));
    line.setAttribute("class", edge.blocked ? "edge blocked" : "edge");
    svg.append(line);
  }
  for (const node of model.nodes) {
    const circle = document.createElementNS(svgNS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", "8");
    circle.setAttribute("class", "room");
    const label = document.createElementNS(svgNS, "text");
    label.setAttribute("x", String(node.x));
    label.setAttribute("y", String(node.y - 12));
    label.setAttribute("class", "room-label");
    label.textContent = node.room;
    svg.append(circle, label);
  }
  for (const robot of model.robots) {
    const marker = document.createElementNS(svgNS, "rect");
    marker.setAttribute("x", String(robot.x - 5));
    marker.setAttribute("y", String(robot.y - 5));
    marker.setAttribute("width", "10");
    marker.setAttribute("height", "10");
    marker.setAttribute("class", "robot");
    const label = document.createElementNS(svgNS, "text");
    label.setAttribute("x", String(robot.x));
    label.setAttribute("y", String(robot.y + 18));
    label.setAttribute("class", "robot-label");
    label.textContent = robot.agent;
    svg.append(marker, label);
  }
  els.mapPanel.replaceChildren(svg);
}

function renderNotices(els: ConsoleElements, state: ViewState): void {
  els.notices.replaceChildren(
    ...state.notices.slice(-3).map((notice) => {
      const div = document.createElement("div");
      div.className = "notice";
      div.textContent = `${notice.code}: ${notice.detail}`;
      return div;
    }),
  );
}

export function toast(els: ConsoleElements, text: string): void {
  const div = document.createElement("div");
  div.className = "notice toast";
  div.textContent = text;
  els.notices.append(div);
  setTimeout(() => div.remove(), 4000);
}

function initials(name: string): string {
  return name.slice(0, 2).toUpperCase();
}

function muted(text: string): HTMLElement {
  const div = document.createElement("div");
  div.className = "muted";
  div.textContent = text;
  return div;
}

function ok(text: string): HTMLElement {
  const span = document.createElement("span");
  span.className = "hop-ok";
  span.textContent = text;
  return span;
}

function bad(text: string): HTMLElement {
  const span = document.createElement("span");
  span.className = "hop-bad";
  span.textContent = text;
  return span;
}
