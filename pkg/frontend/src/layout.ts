/**
 * Deterministic map geometry: rooms on a circle in snapshot order, robots
 * offset inside their current room, blocked edges flagged for highlighting.
 * Pure data in, pure data out; the SVG layer just draws the result.
 */

import type { SessionInfo } from "./types.js";

export interface NodePoint {
  room: string;
  x: number;
  y: number;
}

export interface EdgeLine {
  a: string;
  b: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  blocked: boolean;
}

export interface RobotMarker {
  agent: string;
  room: string;
  x: number;
  y: number;
}

export interface MapModel {
  nodes: NodePoint[];
  edges: EdgeLine[];
  robots: RobotMarker[];
}

const MARGIN = 46;
const ROBOT_SPREAD = 14;

export function circularLayout(rooms: string[], width: number, height: number): NodePoint[] {
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.max(10, Math.min(width, height) / 2 - MARGIN);
  if (rooms.length === 1) {
    return [{ room: rooms[0], x: cx, y: cy }];
  }
  return rooms.map((room, i) => {
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / rooms.length;
    return {
      room,
      x: round2(cx + radius * Math.cos(angle)),
      y: round2(cy + radius * Math.sin(angle)),
    };
  });
}

export function buildMapModel(
  info: SessionInfo,
  positions: Record<string, string>,
  blockedEdges: [string, string][],
  width: number,
  height: number,
): MapModel {
  const nodes = circularLayout(info.rooms, width, height);
  const byRoom = new Map(nodes.map((n) => [n.room.toLowerCase(), n]));
  const edges: EdgeLine[] = info.edges.map(([a, b]) => {
    const na = byRoom.get(a.toLowerCase());
    const nb = byRoom.get(b.toLowerCase());
    return {
      a,
      b,
      x1: na?.x ?? 0,
      y1: na?.y ?? 0,
      x2: nb?.x ?? 0,
      y2: nb?.y ?? 0,
      blocked: blockedEdges.some(
        (e) => edgeKey(e[0], e[1]) === edgeKey(a, b),
      ),
    };
  });
  // Robots in the same room fan out horizontally in roster order.
  const perRoomCount = new Map<string, number>();
  const robots: RobotMarker[] = info.roster.map(({ name }) => {
    const room = positions[name] ?? info.roster.find((r) => r.name === name)!.start_room;
    const node = byRoom.get(room.toLowerCase());
    const index = perRoomCount.get(room.toLowerCase()) ?? 0;
    perRoomCount.set(room.toLowerCase(), index + 1);
    return {
      agent: name,
      room,
      x: (node?.x ?? 0) + index * ROBOT_SPREAD,
      y: (node?.y ?? 0) + 18,
    };
  });
  return { nodes, edges, robots };
}

function edgeKey(a: string, b: string): string {
  return [a.toLowerCase(), b.toLowerCase()].sort().join("|");
}

function round2(n: number): number {
  return Math.round(n * 100) / 100;
}
