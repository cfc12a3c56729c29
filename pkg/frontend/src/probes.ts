/** SA probe prompts: shown as soon as asked, never blocking command input. */

import type { ProbeEntry } from "./protocol.js";

export interface ActiveProbe extends ProbeEntry {
  shownAt: number;
}

export class ProbePrompter {
  active: ActiveProbe | null = null;
  answered: number[] = [];

  show(probe: ProbeEntry, now: number): void {
    this.active = { ...probe, shownAt: now };
  }

  /** Build the answer message; the prompt clears, input was never blocked. */
  answer(value: unknown): { type: "probe_answer"; index: number; answer: unknown } | null {
    if (this.active === null) return null;
    const index = this.active.index;
    this.answered.push(index);
    this.active = null;
    return { type: "probe_answer", index, answer: value };
  }

  dismissIfStale(now: number, maxAge = 60): void {
    if (this.active && now - this.active.shownAt > maxAge) {
      this.active = null;
    }
  }
}
