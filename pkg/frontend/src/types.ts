export type Phase =
  | "setup"
  | "discussion"
  | "awaiting_approval"
  | "executing"
  | "completed"
  | "aborted";

export type AuthorKind = "supervisor" | "agent" | "executor" | "system";

export interface TranscriptEntry {
  seq: number;
  author: { kind: AuthorKind; name?: string };
  body: string;
}

export type EventType =
  | "phase_changed"
  | "message_appended"
  | "plan_validated"
  | "execution_event"
  | "error";

export interface GatewayEvent {
  seq: number;
  type: EventType;
  payload: Record<string, unknown>;
}

export interface PathViolation {
  kind: "unknown_room" | "non_adjacent" | "empty_path";
  room?: string;
  from?: string;
  to?: string;
  index?: number;
}

export interface ValidationReport {
  ok: boolean;
  missing_agents: string[];
  per_agent: Record<
    string,
    {
      violations: PathViolation[];
      start_mismatch: { expected: string; found: string } | null;
    }
  >;
}

export interface RosterEntry {
  name: string;
  description: string;
  start_room: string;
}

export interface Snapshot {
  id: string;
  phase: Phase;
  positions: Record<string, string>;
  rounds_used: number;
  transcript_length: number;
  transcript_tail: TranscriptEntry[];
  plan: Record<string, string[]> | null;
  validation: ValidationReport | null;
  event_count: number;
  flowchart: string;
  roster: RosterEntry[];
  rooms: string[];
  edges: [string, string][];
}

/** Immutable session facts the reducer never touches. */
export interface SessionInfo {
  id: string;
  rooms: string[];
  edges: [string, string][];
  roster: RosterEntry[];
}
