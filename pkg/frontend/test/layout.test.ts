import { describe, expect, it } from "vitest";

import { buildMapModel, circularLayout } from "../src/layout.js";
import type { SessionInfo } from "../src/types.js";

const INFO: SessionInfo = {
  id: "s1",
  rooms: ["Kitchen", "Hall", "Office"],
  edges: [
    ["Kitchen", "Hall"],
    ["Hall", "Office"],
  ],
  roster: [
    { name: "Alpha", description: "Sweeper.", start_room: "Kitchen" },
    { name: "Bravo", description: "Carrier.", start_room: "Office" },
  ],
};

const START = { Alpha: "Kitchen", Bravo: "Office" };

describe("circular layout", () => {
  it("is deterministic and ordered by room list", () => {
    const a = circularLayout(INFO.rooms as string[], 400, 300);
    const b = circularLayout(INFO.rooms as string[], 400, 300);
    expect(a).toEqual(b);
    expect(a.map((n) => n.room)).toEqual(["Kitchen", "Hall", "Office"]);
  });

  it("places the first room at the top of the circle", () => {
    const nodes = circularLayout(["A", "B", "C", "D"], 400, 400);
    expect(nodes[0].x).toBeCloseTo(200, 1);
    expect(nodes[0].y).toBeLessThan(200);
  });

  it("handles a single room by centering it", () => {
    expect(circularLayout(["Solo"], 400, 300)).toEqual([{ room: "Solo", x: 200, y: 150 }]);
  });
});

describe("map model", () => {
  it("renders three rooms, two edges, robots at their start rooms", () => {
    const model = buildMapModel(INFO, START, [], 400, 300);
    expect(model.nodes).toHaveLength(3);
    expect(model.edges).toHaveLength(2);
    expect(model.edges.every((e) => !e.blocked)).toBe(true);
    const alpha = model.robots.find((r) => r.agent === "Alpha")!;
    const kitchen = model.nodes.find((n) => n.room === "Kitchen")!;
    expect(alpha.room).toBe("Kitchen");
    expect(alpha.x).toBeCloseTo(kitchen.x, 1);
  });

  it("moves a marker after an arrival", () => {
    const model = buildMapModel(INFO, { ...START, Alpha: "Hall" }, [], 400, 300);
    const alpha = model.robots.find((r) => r.agent === "Alpha")!;
    const hall = model.nodes.find((n) => n.room === "Hall")!;
    expect(alpha.room).toBe("Hall");
    expect(alpha.x).toBeCloseTo(hall.x, 1);
  });

  it("flags a blocked edge regardless of orientation and case", () => {
    const model = buildMapModel(INFO, START, [["office", "HALL"]], 400, 300);
    const blocked = model.edges.filter((e) => e.blocked);
    expect(blocked).toHaveLength(1);
    expect([blocked[0].a, blocked[0].b].sort()).toEqual(["Hall", "Office"]);
  });

  it("fans out robots sharing a room", () => {
    const model = buildMapModel(INFO, { Alpha: "Hall", Bravo: "Hall" }, [], 400, 300);
    const [first, second] = model.robots;
    expect(first.room).toBe("Hall");
    expect(second.room).toBe("Hall");
    expect(first.x).not.toBe(second.x);
  });
});
