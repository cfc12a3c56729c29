/** UI telemetry: every click, window toggle, drag, and layout-count change
 * goes back to the engine so clutter and interaction metrics are computed
 * server-side. Events buffer while the socket is down and flush on send. */

import type { Mode, Snapshot } from "./protocol.js";

export type UiPayload = Record<string, unknown>;

export interface LayoutCounts {
  highlighted: number;
  plain: number;
  target_windows: number;
  collective_windows: number;
}

export class Telemetry {
  private nextClickId = 1;
  private buffer: UiPayload[] = [];
  private lastLayout: (LayoutCounts & { mode: Mode }) | null = null;

  constructor(private send: (payload: UiPayload) => boolean) {}

  private emit(payload: UiPayload): void {
    this.buffer.push(payload);
    this.flush();
  }

  flush(): void {
    while (this.buffer.length > 0) {
      if (!this.send(this.buffer[0])) return; // keep buffering while offline
      this.buffer.shift();
    }
  }

  get pending(): number {
    return this.buffer.length;
  }

  click(kind: "collective" | "target", button: "left" | "right",
        subject: number, pos: [number, number]): number {
    const clickId = this.nextClickId++;
    this.emit({
      ui: "click",
      click: `${kind}_${button}_click`,
      subject,
      pos,
      click_id: clickId,
    });
    return clickId;
  }

  windowToggle(kind: "target" | "collective", subject: number,
               open: boolean, pos: [number, number]): void {
    this.emit({ ui: "window", action: open ? "open" : "close",
                window: kind, subject, pos });
  }

  windowDrag(kind: "target" | "collective", subject: number,
             pos: [number, number]): void {
    // Drags move pixels around but never change any layout count.
    this.emit({ ui: "drag", window: kind, subject, pos });
  }

  /** Send layout counts when (and only when) they changed. */
  layout(counts: LayoutCounts, mode: Mode): void {
    const next = { ...counts, mode };
    const last = this.lastLayout;
    if (last && last.mode === mode
        && last.highlighted === counts.highlighted
        && last.plain === counts.plain
        && last.target_windows === counts.target_windows
        && last.collective_windows === counts.collective_windows) {
      return;
    }
    this.lastLayout = next;
    this.emit({ ui: "layout", mode, ...counts });
  }
}

/** Layout counts derivable from the console's own state; the self-consistency
 * invariant says these must match what the renderer outlines. */
export function deriveLayoutCounts(
  snapshot: Snapshot,
  selectedCollective: number | null,
  openWindows: Iterable<string>,
): LayoutCounts {
  let highlighted = 0;
  for (const target of snapshot.targets) {
    if (selectedCollective !== null && target.in_range_of.includes(selectedCollective)) {
      highlighted += 1;
    }
  }
  const plain = snapshot.targets.length - highlighted;
  let targetWindows = 0;
  let collectiveWindows = 0;
  for (const key of openWindows) {
    if (key.startsWith("target:")) targetWindows += 1;
    else collectiveWindows += 1;
  }
  return {
    highlighted,
    plain,
    target_windows: targetWindows,
    collective_windows: collectiveWindows,
  };
}
