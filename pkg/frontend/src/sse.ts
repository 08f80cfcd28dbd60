/**
 * Minimal server-sent-events reader over fetch streaming. Used by tests and
 * by environments without EventSource; the browser console itself prefers
 * the native EventSource (automatic reconnect with Last-Event-ID).
 */

import type { GatewayEvent } from "./types.js";

/** Incremental parser: feed chunks, collect completed events. */
export class SSEParser {
  private buffer = "";
  private current: { id?: number; event?: string; data?: string } = {};

  feed(chunk: string): GatewayEvent[] {
    this.buffer += chunk;
    const events: GatewayEvent[] = [];
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).replace(/\r$/, "");
      this.buffer = this.buffer.slice(index + 1);
      if (line === "") {
        const done = this.flush();
        if (done) {
          events.push(done);
        }
      } else if (line.startsWith("id: ")) {
        this.current.id = Number(line.slice(4));
      } else if (line.startsWith("event: ")) {
        this.current.event = line.slice(7);
      } else if (line.startsWith("data: ")) {
        this.current.data = (this.current.data ?? "") + line.slice(6);
      }
    }
    return events;
  }

  private flush(): GatewayEvent | null {
    const { id, event, data } = this.current;
    this.current = {};
    if (id === undefined || event === undefined || data === undefined) {
      return null;
    }
    return {
      seq: id,
      type: event as GatewayEvent["type"],
      payload: JSON.parse(data) as Record<string, unknown>,
    };
  }
}

/** Read a whole event stream until the server closes it. */
export async function readEventStream(
  url: string,
  onEvent?: (evt: GatewayEvent) => void,
): Promise<GatewayEvent[]> {
  const response = await fetch(url, { headers: { Accept: "text/event-stream" } });
  if (!response.ok || response.body === null) {
    throw new Error(`event stream failed: HTTP ${response.status}`);
  }
  const parser = new SSEParser();
  const decoder = new TextDecoder();
  const events: GatewayEvent[] = [];
  for await (const chunk of response.body as unknown as AsyncIterable<Uint8Array>) {
    for (const evt of parser.feed(decoder.decode(chunk, { stream: true }))) {
      events.push(evt);
      onEvent?.(evt);
    }
  }
  return events;
}
