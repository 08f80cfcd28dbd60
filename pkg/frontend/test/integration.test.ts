/**
 * Console against the real gateway: spawn the server, drive the bundled
 * happy-path mission with the console's state fold attached to the live
 * event stream, then check the event-sourcing guarantees end to end.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { createServer } from "node:net";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient, GatewayError } from "../src/gateway.js";
import { readEventStream } from "../src/sse.js";
import {
  applyEvent,
  approveEnabled,
  initialViewState,
  rebuildViewState,
  type ViewState,
} from "../src/state.js";
import type { GatewayEvent, SessionInfo, Snapshot, TranscriptEntry } from "../src/types.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "..", "..", "tests", "fixtures");

let server: ChildProcess;
let base: string;
let client: GatewayClient;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitForHealthy(url: string, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${url}/healthz`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("gateway did not come up");
}

function happyConfig(): Record<string, unknown> {
  const config = JSON.parse(readFileSync(join(FIXTURES, "happy.config.json"), "utf-8"));
  const script = readFileSync(join(FIXTURES, "happy.script.txt"), "utf-8");
  const responses = script
    .split(/^---$/m)
    .map((block) => block.trim())
    .filter((block) => block.length > 0);
  config.provider.responses = responses;
  return config;
}

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn("python3", ["-m", "parley.cli", "serve", "--bind", `127.0.0.1:${port}`], {
    stdio: "ignore",
  });
  await waitForHealthy(base);
  client = new GatewayClient(base);
});

afterAll(() => {
  server?.kill();
});

describe("console attached to a live mission", () => {
  it("mirrors the stored transcript, gates approve, and rebuilds identically", async () => {
    const { id } = await client.createSession(happyConfig());
    const snapshot = await client.snapshot(id);
    const info: SessionInfo = {
      id: snapshot.id,
      rooms: snapshot.rooms,
      edges: snapshot.edges,
      roster: snapshot.roster,
    };

    // Attach the console fold to the live stream before driving anything.
    let live: ViewState = initialViewState(info);
    const approveSeenEnabled: boolean[] = [];
    const streamDone = readEventStream(client.eventsUrl(id), (evt: GatewayEvent) => {
      live = applyEvent(live, info, evt);
      approveSeenEnabled.push(approveEnabled(live.phase));
    });

    // Drive the mission like the console's buttons would.
    await client.sendMessage(id, "Collect the cups left in the Hall after lunch.");
    for (let i = 0; i < 20; i++) {
      const state = (await client.snapshot(id)) as Snapshot;
      if (state.phase === "completed") break;
      if (state.phase === "awaiting_approval") {
        expect(approveEnabled(state.phase)).toBe(true); // button on, server accepts
        await client.approve(id);
      } else {
        await client.step(id, 5);
      }
    }
    const events = await streamDone; // server closes the stream at completion

    // A disabled approve button is exactly a server 409.
    expect(approveEnabled(live.phase)).toBe(false);
    await expect(client.approve(id)).rejects.toSatisfy(
      (error: unknown) => error instanceof GatewayError && error.status === 409,
    );

    // Rendered transcript equals the stored transcript element-wise.
    const stored = (await fetch(`${base}/sessions/${id}/transcript`).then((r) => r.text()))
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line) as TranscriptEntry);
    expect(live.transcript).toStrictEqual(stored);
    expect(live.phase).toBe("completed");
    expect(live.positions).toStrictEqual({ Alpha: "Hall", Bravo: "Office" });
    expect(live.planOk).toBe(true);

    // The stream was gapless and the approve gate was only ever enabled in
    // awaiting_approval folds.
    expect(events.map((e) => e.seq)).toStrictEqual(events.map((_, i) => i));
    const awaitingFolds = events.filter((e, i) => approveSeenEnabled[i]);
    expect(awaitingFolds.length).toBeGreaterThan(0);

    // Discard the view; rebuild from snapshot + a fresh replay; identical.
    const replay = await readEventStream(client.eventsUrl(id));
    const rebuilt = rebuildViewState(info, replay);
    expect(rebuilt).toStrictEqual(live);

    // Resuming mid-log picks up exactly after the given id.
    const tail = await readEventStream(client.eventsUrl(id, 4));
    expect(tail[0]?.seq).toBe(5);
    expect(tail.length).toBe(events.length - 5);
  });

  it("surfaces config errors as machine-readable codes", async () => {
    const config = happyConfig();
    (config as { agents: unknown }).agents = [];
    await expect(client.createSession(config)).rejects.toSatisfy(
      (error: unknown) =>
        error instanceof GatewayError && error.status === 400 && error.code === "empty_roster",
    );
  });
});
