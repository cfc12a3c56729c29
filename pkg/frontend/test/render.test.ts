import { describe, expect, it } from "vitest";

import { OUTLINE_COLORS } from "../src/encodings.js";
import {
  buildFrame,
  flightOutlinePosition,
  TARGET_GREEN,
  TARGET_WHITE,
  targetFill,
  windowLines,
} from "../src/render.js";
import type { ViewState } from "../src/render.js";
import { collective, snapshot, target } from "./helpers.js";

function view(partial: Partial<ViewState> = {}): ViewState {
  return {
    mode: "collective",
    selectedCollective: null,
    selectedTarget: null,
    windowPositions: new Map(),
    ...partial,
  };
}

describe("target fill rules", () => {
  it("draws white until two entities evaluated the target", () => {
    const t = target({ valued: false, value: null, evaluations: 1 });
    expect(targetFill(t).fill).toBe(TARGET_WHITE);
  });

  it("turns green once valued, brighter for higher values", () => {
    const low = targetFill(target({ value: 67 }));
    const high = targetFill(target({ value: 100 }));
    expect(low.fill).toBe(TARGET_GREEN);
    expect(high.opacity).toBeGreaterThan(low.opacity);
  });
});

describe("buildFrame", () => {
  it("is a pure function of snapshot and view state", () => {
    const snap = snapshot({
      targets: [target(), target({ id: 1, pos: [500, 400], support: { "0": 12 } })],
      collectives: [collective()],
    });
    const v = view({ selectedCollective: 0, mode: "collective" });
    expect(JSON.stringify(buildFrame(snap, v))).toBe(JSON.stringify(buildFrame(snap, v)));
  });

  it("outlines abandoned targets red for the selected collective", () => {
    const snap = snapshot({
      targets: [target({ abandoned_by: [0], support: { "0": 4 } })],
    });
    const ops = buildFrame(snap, view({ selectedCollective: 0 }));
    const targetOp = ops.find((o) => o.op === "target")!;
    expect(targetOp).toMatchObject({ outline: OUTLINE_COLORS.abandoned });
  });

  it("outlines investigated targets white and idle ones yellow", () => {
    const snap = snapshot({
      targets: [
        target({ id: 0, support: { "0": 9 } }),
        target({ id: 1, pos: [650, 350], support: {} }),
      ],
    });
    const ops = buildFrame(snap, view({ selectedCollective: 0 }));
    const byId = new Map(ops.filter((o) => o.op === "target").map((o: any) => [o.id, o]));
    expect(byId.get(0)!.outline).toBe(OUTLINE_COLORS.investigating);
    expect(byId.get(1)!.outline).toBe(OUTLINE_COLORS.in_range);
  });

  it("draws no outlines without a selected collective", () => {
    const ops = buildFrame(snapshot(), view());
    expect(ops.filter((o) => o.op === "target").every((o: any) => o.outline === null)).toBe(true);
  });

  it("draws every entity in IA mode and none in collective mode", () => {
    const snap = snapshot({
      collectives: [collective({ entities: [[0, 10, 10], [1, 20, 20], [3, 30, 30]] })],
    });
    const ia = buildFrame(snap, view({ mode: "ia" }));
    const abstract = buildFrame(snap, view({ mode: "collective" }));
    expect(ia.filter((o) => o.op === "entity")).toHaveLength(3);
    expect(abstract.filter((o) => o.op === "entity")).toHaveLength(0);
  });

  it("animates the hub outline toward the target while executing", () => {
    const flight = { target: 0, to: [600, 187] as [number, number], started_at: 0, arrives_at: 100 };
    const mid = flightOutlinePosition([246, 187], flight, 50);
    expect(mid[0]).toBeCloseTo((246 + 600) / 2);
    const snap = snapshot({
      t: 50,
      collectives: [collective({ phase: "executing", phase_target: 0, flight })],
    });
    const hub = buildFrame(snap, view()).find((o) => o.op === "hub") as any;
    expect(hub.outlineAt[0]).toBeGreaterThan(246);
    expect(hub.outlineAt[0]).toBeLessThan(600);
  });

  it("quadrant brightness tracks the state counts", () => {
    const snap = snapshot({
      collectives: [collective({
        state_counts: { uncommitted: 100, favoring: 60, committed: 40, executing: 0 },
      })],
    });
    const hub = buildFrame(snap, view()).find((o) => o.op === "hub") as any;
    expect(hub.quadrants).toEqual([0.5, 0.3, 0.2, 0]);
  });
});

describe("windowLines", () => {
  it("target windows list per-collective support percentages", () => {
    const snap = snapshot({
      collectives: [collective(), collective({ id: 1, label: "II" })],
      targets: [target({ support: { "0": 50, "1": 10 } })],
    });
    expect(windowLines(snap, "target", 0)).toEqual(["I: 25.0%", "II: 5.0%"]);
  });

  it("collective windows list the four state counts", () => {
    const snap = snapshot({
      collectives: [collective({
        state_counts: { uncommitted: 120, favoring: 50, committed: 20, executing: 10 },
      })],
    });
    expect(windowLines(snap, "collective", 0)).toEqual(["U: 120", "F: 50", "C: 20", "X: 10"]);
  });
});

describe("targetLabel", () => {
  it("defaults to integers and switches to letters via the view flag", async () => {
    const { targetLabel } = await import("../src/render.js");
    expect(targetLabel(0, false)).toBe("0");
    expect(targetLabel(0, true)).toBe("A");
    expect(targetLabel(25, true)).toBe("Z");
    expect(targetLabel(26, true)).toBe("AA");
    const ops = buildFrame(snapshot(), view({ targetLetters: true }));
    expect((ops.find((o) => o.op === "target") as any).label).toBe("A");
  });
});
