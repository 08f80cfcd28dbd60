/**
 * Event-sourced view state. The console never invents state: everything on
 * screen is a fold over the gateway's event stream, so rebuilding from a
 * snapshot plus a replay always converges to the live view.
 */

import type {
  GatewayEvent,
  PathViolation,
  Phase,
  SessionInfo,
  TranscriptEntry,
  ValidationReport,
} from "./types.js";

export type InputMode = "task" | "advice" | "interrupt" | null;

export interface PlanRow {
  agent: string;
  path: string[];
  missing: boolean;
  /** one flag per room in path: true when that hop/room is valid */
  roomOk: boolean[];
  startMismatch: { expected: string; found: string } | null;
}

export interface Notice {
  seq: number;
  code: string;
  detail: string;
}

export interface ViewState {
  phase: Phase;
  lastSeq: number;
  transcript: TranscriptEntry[];
  planRows: PlanRow[];
  planOk: boolean | null;
  positions: Record<string, string>;
  blockedEdges: [string, string][];
  notices: Notice[];
}

export function initialViewState(info: SessionInfo): ViewState {
  const positions: Record<string, string> = {};
  for (const member of info.roster) {
    positions[member.name] = member.start_room;
  }
  return {
    phase: "setup",
    lastSeq: -1,
    transcript: [],
    planRows: [],
    planOk: null,
    positions,
    blockedEdges: [],
    notices: [],
  };
}

/** Apply one stream event; duplicate or stale seq numbers are dropped. */
export function applyEvent(state: ViewState, info: SessionInfo, evt: GatewayEvent): ViewState {
  if (evt.seq <= state.lastSeq) {
    return state;
  }
  const next: ViewState = { ...state, lastSeq: evt.seq };
  switch (evt.type) {
    case "message_appended": {
      const message = evt.payload["message"] as TranscriptEntry;
      next.transcript = [...state.transcript, message];
      break;
    }
    case "phase_changed": {
      next.phase = evt.payload["phase"] as Phase;
      if (next.phase === "executing") {
        next.blockedEdges = [];
      }
      break;
    }
    case "plan_validated": {
      const plans = (evt.payload["plans"] ?? {}) as Record<string, string[]>;
      const report = evt.payload["report"] as ValidationReport;
      next.planRows = buildPlanRows(info, plans, report);
      next.planOk = report.ok;
      break;
    }
    case "execution_event": {
      const kind = evt.payload["kind"] as string;
      if (kind === "arrive") {
        next.positions = {
          ...state.positions,
          [evt.payload["agent"] as string]: evt.payload["room"] as string,
        };
      } else if (kind === "blocked") {
        const edge: [string, string] = [
          evt.payload["from"] as string,
          evt.payload["to"] as string,
        ];
        if (!state.blockedEdges.some((e) => sameEdge(e, edge))) {
          next.blockedEdges = [...state.blockedEdges, edge];
        }
      }
      break;
    }
    case "error": {
      next.notices = [
        ...state.notices,
        {
          seq: evt.seq,
          code: String(evt.payload["code"] ?? "error"),
          detail: String(evt.payload["detail"] ?? ""),
        },
      ];
      break;
    }
  }
  return next;
}

export function applyEvents(
  state: ViewState,
  info: SessionInfo,
  events: GatewayEvent[],
): ViewState {
  return events.reduce((acc, evt) => applyEvent(acc, info, evt), state);
}

/** Rebuild path: fold the full replay over a fresh state. Converges with the
 * live view because both are the same fold over the same log. */
export function rebuildViewState(info: SessionInfo, events: GatewayEvent[]): ViewState {
  return applyEvents(initialViewState(info), info, events);
}

export function sameEdge(a: [string, string], b: [string, string]): boolean {
  const [a0, a1] = [a[0].toLowerCase(), a[1].toLowerCase()];
  const [b0, b1] = [b[0].toLowerCase(), b[1].toLowerCase()];
  return (a0 === b0 && a1 === b1) || (a0 === b1 && a1 === b0);
}

function buildPlanRows(
  info: SessionInfo,
  plans: Record<string, string[]>,
  report: ValidationReport,
): PlanRow[] {
  return info.roster.map(({ name }) => {
    const path = plans[name] ?? [];
    const agentReport = report.per_agent[name];
    const roomOk = path.map(() => true);
    for (const violation of agentReport?.violations ?? []) {
      markViolation(roomOk, violation);
    }
    return {
      agent: name,
      path,
      missing: path.length === 0,
      roomOk,
      startMismatch: agentReport?.start_mismatch ?? null,
    };
  });
}

function markViolation(roomOk: boolean[], violation: PathViolation): void {
  if (violation.index !== undefined && violation.index < roomOk.length) {
    roomOk[violation.index] = false;
  }
}

// --- phase-derived UI gating ---------------------------------------------

export function inputModeForPhase(phase: Phase): InputMode {
  switch (phase) {
    case "setup":
      return "task";
    case "discussion":
    case "awaiting_approval":
      return "advice";
    case "executing":
      return "interrupt";
    default:
      return null;
  }
}

/** Mirrors the gateway's 409 rules: a disabled button is one the server
 * would reject. */
export function approveEnabled(phase: Phase): boolean {
  return phase === "awaiting_approval";
}

export function stepEnabled(phase: Phase): boolean {
  return phase === "discussion" || phase === "executing";
}

export function sendEnabled(phase: Phase): boolean {
  return inputModeForPhase(phase) !== null;
}
