/** Pure frame construction: (snapshot, view state) -> list of draw ops.
 * Painting the ops onto a canvas lives in main.ts; everything here is
 * deterministic and testable without a DOM. */

import {
  ENTITY_COLORS,
  outlineClass,
  OUTLINE_COLORS,
  quadrantBrightness,
  supportOpacity,
  valueOpacity,
} from "./encodings.js";
import type { Mode, Snapshot, TargetEntry } from "./protocol.js";

export interface ViewState {
  mode: Mode;
  selectedCollective: number | null;
  selectedTarget: number | null;
  windowPositions: Map<string, [number, number]>;
  /** Render target identifiers as letters instead of integers (avoids
   * confusion with the roman-numeral collective labels). */
  targetLetters?: boolean;
}

export type DrawOp =
  | { op: "target"; id: number; label: string; x: number; y: number; fill: string;
      opacity: number; outline: string | null; selected: boolean; supportOpacity: number }
  | { op: "hub"; id: number; label: string; x: number; y: number;
      quadrants: [number, number, number, number]; outlineAt: [number, number] }
  | { op: "entity"; collective: number; x: number; y: number; color: string }
  | { op: "window"; key: string; x: number; y: number; kind: string; subject: number;
      lines: string[] };

export const TARGET_WHITE = "#f4f4f4";
export const TARGET_GREEN = "#0aa04c";

export function targetFill(target: TargetEntry): { fill: string; opacity: number } {
  // White until two entities have assessed the target, then value-coded green.
  if (!target.valued || target.value === null) {
    return { fill: TARGET_WHITE, opacity: 1.0 };
  }
  return { fill: TARGET_GREEN, opacity: valueOpacity(target.value) };
}

export function flightOutlinePosition(
  hub: [number, number],
  flight: { to: [number, number]; started_at: number; arrives_at: number },
  now: number,
): [number, number] {
  const span = flight.arrives_at - flight.started_at;
  const frac = span <= 0 ? 1 : Math.min(1, Math.max(0, (now - flight.started_at) / span));
  return [hub[0] + (flight.to[0] - hub[0]) * frac, hub[1] + (flight.to[1] - hub[1]) * frac];
}

export function buildFrame(snapshot: Snapshot, view: ViewState): DrawOp[] {
  const ops: DrawOp[] = [];
  const selected = view.selectedCollective;
  const selectedEntry = snapshot.collectives.find((c) => c.id === selected);

  for (const target of snapshot.targets) {
    const { fill, opacity } = targetFill(target);
    let outline: string | null = null;
    if (selected !== null && selectedEntry) {
      const cls = outlineClass(
        target.in_range_of.includes(selected),
        target.support[String(selected)] ?? 0,
        target.abandoned_by.includes(selected),
      );
      outline = cls === null ? null : OUTLINE_COLORS[cls];
    }
    const maxSupport = Math.max(0, ...Object.values(target.support));
    const population = snapshot.collectives[0]?.population ?? 200;
    ops.push({
      op: "target", id: target.id,
      label: targetLabel(target.id, view.targetLetters ?? false),
      x: target.pos[0], y: target.pos[1],
      fill, opacity, outline,
      selected: view.selectedTarget === target.id,
      supportOpacity: view.mode === "collective" ? supportOpacity(maxSupport, population) : 0,
    });
  }

  for (const col of snapshot.collectives) {
    const counts = col.state_counts;
    const quadrants: [number, number, number, number] = [
      quadrantBrightness(counts.uncommitted, col.population),
      quadrantBrightness(counts.favoring, col.population),
      quadrantBrightness(counts.committed, col.population),
      quadrantBrightness(counts.executing, col.population),
    ];
    const outlineAt: [number, number] =
      col.phase === "executing" && col.flight
        ? flightOutlinePosition(col.hub, col.flight, snapshot.t)
        : [col.hub[0], col.hub[1]];
    ops.push({
      op: "hub", id: col.id, label: col.label, x: col.hub[0], y: col.hub[1],
      quadrants, outlineAt,
    });
    if (view.mode === "ia" && col.entities) {
      for (const [state, x, y] of col.entities) {
        ops.push({ op: "entity", collective: col.id, x, y,
                   color: ENTITY_COLORS[state] ?? ENTITY_COLORS[0] });
      }
    }
  }

  for (const [key, pos] of view.windowPositions) {
    const [kind, subjectRaw] = key.split(":");
    const subject = Number(subjectRaw);
    ops.push({
      op: "window", key, x: pos[0], y: pos[1], kind, subject,
      lines: windowLines(snapshot, kind, subject),
    });
  }
  return ops;
}

export function targetLabel(id: number, letters: boolean): string {
  if (!letters) return String(id);
  let n = id;
  let out = "";
  do {
    out = String.fromCharCode(65 + (n % 26)) + out;
    n = Math.floor(n / 26) - 1;
  } while (n >= 0);
  return out;
}

export function windowLines(snapshot: Snapshot, kind: string, subject: number): string[] {
  if (kind === "target") {
    const target = snapshot.targets.find((t) => t.id === subject);
    if (!target) return [`target ${subject} (gone)`];
    // Per-collective support percentages for this target.
    return snapshot.collectives.map((c) => {
      const s = target.support[String(c.id)] ?? 0;
      const pct = c.live > 0 ? ((100 * s) / c.live).toFixed(1) : "0.0";
      return `${c.label}: ${pct}%`;
    });
  }
  const col = snapshot.collectives.find((c) => c.id === subject);
  if (!col) return [`collective ${subject} (gone)`];
  const counts = col.state_counts;
  return [
    `U: ${counts.uncommitted}`,
    `F: ${counts.favoring}`,
    `C: ${counts.committed}`,
    `X: ${counts.executing}`,
  ];
}
