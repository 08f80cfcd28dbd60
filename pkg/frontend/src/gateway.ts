/** Thin client for the session gateway; no state of its own. */

import type { GatewayEvent, Snapshot } from "./types.js";

export type ConnectionStatus = "connecting" | "live" | "disconnected-retrying" | "closed";

export interface StreamHandlers {
  onEvent: (evt: GatewayEvent) => void;
  onStatus: (status: ConnectionStatus) => void;
}

export class GatewayError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export class GatewayClient {
  constructor(private readonly baseUrl: string) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const document = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new GatewayError(
        response.status,
        String(document["code"] ?? "error"),
        String(document["detail"] ?? response.statusText),
      );
    }
    return document;
  }

  createSession(config: unknown): Promise<{ id: string }> {
    return this.request("POST", "/sessions", config) as Promise<{ id: string }>;
  }

  snapshot(sessionId: string): Promise<Snapshot> {
    return this.request("GET", `/sessions/${sessionId}`) as Promise<Snapshot>;
  }

  sendMessage(sessionId: string, text: string): Promise<{ phase: string }> {
    return this.request("POST", `/sessions/${sessionId}/message`, { text }) as Promise<{
      phase: string;
    }>;
  }

  approve(sessionId: string): Promise<{ phase: string }> {
    return this.request("POST", `/sessions/${sessionId}/approve`) as Promise<{ phase: string }>;
  }

  step(sessionId: string, count: number): Promise<{ phase: string; events: GatewayEvent[] }> {
    return this.request("POST", `/sessions/${sessionId}/step`, { count }) as Promise<{
      phase: string;
      events: GatewayEvent[];
    }>;
  }

  eventsUrl(sessionId: string, lastEventId?: number): string {
    const suffix =
      lastEventId === undefined ? "" : `?last_event_id=${encodeURIComponent(lastEventId)}`;
    return `${this.baseUrl}/sessions/${sessionId}/events${suffix}`;
  }

  /**
   * Open the live stream with the native EventSource. The browser retries
   * dropped connections itself and resumes via Last-Event-ID; an explicit
   * reopen (after a long pause) goes through the query parameter instead.
   */
  openEvents(sessionId: string, handlers: StreamHandlers, lastEventId?: number): () => void {
    handlers.onStatus("connecting");
    const source = new EventSource(this.eventsUrl(sessionId, lastEventId));
    const types = [
      "phase_changed",
      "message_appended",
      "plan_validated",
      "execution_event",
      "error",
    ] as const;
    for (const type of types) {
      source.addEventListener(type, (raw) => {
        const message = raw as MessageEvent<string>;
        handlers.onStatus("live");
        handlers.onEvent({
          seq: Number(message.lastEventId),
          type,
          payload: JSON.parse(message.data) as Record<string, unknown>,
        });
      });
    }
    source.onopen = () => handlers.onStatus("live");
    source.onerror = () => {
      // readyState CLOSED means the server ended the stream (terminal phase).
      if (source.readyState === EventSource.CLOSED) {
        handlers.onStatus("closed");
      } else {
        handlers.onStatus("disconnected-retrying");
      }
    };
    return () => source.close();
  }
}
