import { describe, expect, it } from "vitest";

import { deriveLayoutCounts, Telemetry } from "../src/telemetry.js";
import type { UiPayload } from "../src/telemetry.js";
import { WindowManager } from "../src/windows.js";
import { collective, snapshot, target } from "./helpers.js";

function capture() {
  const sent: UiPayload[] = [];
  const telemetry = new Telemetry((p) => {
    sent.push(p);
    return true;
  });
  return { telemetry, sent };
}

describe("Telemetry", () => {
  it("tags clicks with increasing ids and positions", () => {
    const { telemetry, sent } = capture();
    const a = telemetry.click("target", "left", 3, [100, 200]);
    const b = telemetry.click("collective", "right", 0, [50, 60]);
    expect(b).toBe(a + 1);
    expect(sent[0]).toMatchObject({
      ui: "click", click: "target_left_click", subject: 3, pos: [100, 200], click_id: a,
    });
    expect(sent[1]).toMatchObject({ click: "collective_right_click" });
  });

  it("pairs window open and close events", () => {
    const { telemetry, sent } = capture();
    telemetry.windowToggle("target", 4, true, [10, 10]);
    telemetry.windowToggle("target", 4, false, [10, 10]);
    expect(sent.map((p) => p.action)).toEqual(["open", "close"]);
  });

  it("sends layout counts only when they change", () => {
    const { telemetry, sent } = capture();
    const counts = { highlighted: 2, plain: 3, target_windows: 1, collective_windows: 0 };
    telemetry.layout(counts, "ia");
    telemetry.layout({ ...counts }, "ia");            // unchanged: suppressed
    telemetry.layout({ ...counts, plain: 4 }, "ia");  // changed: sent
    expect(sent.filter((p) => p.ui === "layout")).toHaveLength(2);
  });

  it("drag reports a position but never a layout change", () => {
    const { telemetry, sent } = capture();
    const counts = { highlighted: 1, plain: 0, target_windows: 1, collective_windows: 0 };
    telemetry.layout(counts, "collective");
    telemetry.windowDrag("target", 4, [400, 300]);
    telemetry.layout(counts, "collective");
    const layouts = sent.filter((p) => p.ui === "layout");
    expect(layouts).toHaveLength(1);
    expect(sent.some((p) => p.ui === "drag")).toBe(true);
  });

  it("buffers while offline and flushes when the socket returns", () => {
    let online = false;
    const sent: UiPayload[] = [];
    const telemetry = new Telemetry((p) => {
      if (!online) return false;
      sent.push(p);
      return true;
    });
    telemetry.click("target", "left", 1, [0, 0]);
    telemetry.click("target", "left", 2, [0, 0]);
    expect(sent).toHaveLength(0);
    expect(telemetry.pending).toBe(2);
    online = true;
    telemetry.flush();
    expect(sent).toHaveLength(2);
    expect(telemetry.pending).toBe(0);
  });
});

describe("deriveLayoutCounts", () => {
  it("matches the renderer's outline rule", () => {
    const snap = snapshot({
      collectives: [collective()],
      targets: [
        target({ id: 0, in_range_of: [0] }),
        target({ id: 1, in_range_of: [0], abandoned_by: [0] }),
        target({ id: 2, in_range_of: [1] }),
      ],
    });
    const counts = deriveLayoutCounts(snap, 0, ["target:1", "collective:0"]);
    // both in-range targets are outlined (abandoned ones included)
    expect(counts).toEqual({
      highlighted: 2, plain: 1, target_windows: 1, collective_windows: 1,
    });
  });

  it("counts nothing highlighted without a selection", () => {
    const snap = snapshot();
    expect(deriveLayoutCounts(snap, null, []).highlighted).toBe(0);
  });
});

describe("WindowManager", () => {
  it("toggle opens then closes", () => {
    const wm = new WindowManager();
    expect(wm.toggle("target", 3, [5, 5])).toBe(true);
    expect(wm.isOpen("target", 3)).toBe(true);
    expect(wm.toggle("target", 3, [5, 5])).toBe(false);
    expect(wm.isOpen("target", 3)).toBe(false);
  });

  it("drag moves an open window only", () => {
    const wm = new WindowManager();
    wm.drag("target", 3, [9, 9]);
    expect(wm.isOpen("target", 3)).toBe(false);
    wm.toggle("target", 3, [5, 5]);
    wm.drag("target", 3, [9, 9]);
    expect(wm.positions.get("target:3")).toEqual([9, 9]);
  });
});
