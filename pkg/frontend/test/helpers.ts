import type { CollectiveEntry, Snapshot, TargetEntry } from "../src/protocol.js";

export function collective(partial: Partial<CollectiveEntry> = {}): CollectiveEntry {
  return {
    id: 0,
    label: "I",
    hub: [246, 187],
    phase: "deliberating",
    phase_target: null,
    state_counts: { uncommitted: 200, favoring: 0, committed: 0, executing: 0 },
    live: 200,
    population: 200,
    decisions_made: 0,
    support: {},
    decide_locked: false,
    ...partial,
  };
}

export function target(partial: Partial<TargetEntry> = {}): TargetEntry {
  return {
    id: 0,
    pos: [400, 300],
    valued: true,
    value: 90,
    evaluations: 4,
    support: {},
    abandoned_by: [],
    in_range_of: [0],
    ...partial,
  };
}

export function snapshot(partial: Partial<Snapshot> = {}): Snapshot {
  return {
    seq: 1,
    t: 10.0,
    collectives: [collective()],
    targets: [target()],
    assignments: [],
    messages: [],
    probes: [],
    decisions: 0,
    ...partial,
  };
}

export class FakeSocket {
  sent: string[] = [];
  readyState = 1;

  send(data: string): void {
    this.sent.push(data);
  }

  sentJson(): Record<string, unknown>[] {
    return this.sent.map((s) => JSON.parse(s));
  }

  lastOf(type: string): Record<string, unknown> | undefined {
    return this.sentJson().reverse().find((m) => m.type === type);
  }
}
