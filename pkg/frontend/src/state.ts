/** Snapshot store: applies full snapshots and diffs, detects seq gaps. */

import type { Snapshot } from "./protocol.js";

export class SessionState {
  snapshot: Snapshot | null = null;
  lastSeq = -1;
  needsResync = false;
  snapshotsApplied = 0;

  applyFull(data: Snapshot): void {
    this.snapshot = data;
    this.lastSeq = data.seq;
    this.needsResync = false;
    this.snapshotsApplied += 1;
  }

  /**
   * Merge a top-level-key diff. A diff based on a frame this client never
   * saw flags a resync request instead of applying.
   */
  applyDiff(data: Partial<Snapshot> & { seq: number; base_seq?: number }): void {
    if (this.snapshot === null || (data.base_seq !== undefined && data.base_seq !== this.lastSeq)) {
      this.needsResync = true;
      return;
    }
    const { base_seq: _base, ...rest } = data;
    this.snapshot = { ...this.snapshot, ...rest } as Snapshot;
    this.lastSeq = data.seq;
    this.snapshotsApplied += 1;
  }

  get targets() {
    return this.snapshot?.targets ?? [];
  }

  get collectives() {
    return this.snapshot?.collectives ?? [];
  }
}
