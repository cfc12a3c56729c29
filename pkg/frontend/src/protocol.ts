/** Wire types for the session protocol (versioned JSON over a WebSocket). */

export const PROTOCOL_VERSION = 1;

export type Mode = "ia" | "collective";

export interface StateCounts {
  uncommitted: number;
  favoring: number;
  committed: number;
  executing: number;
}

export interface FlightInfo {
  target: number;
  to: [number, number];
  started_at: number;
  arrives_at: number;
}

export interface CollectiveEntry {
  id: number;
  label: string;
  hub: [number, number];
  phase: "deliberating" | "committed" | "executing" | "decided";
  phase_target: number | null;
  state_counts: StateCounts;
  live: number;
  population: number;
  decisions_made: number;
  support: Record<string, number>;
  decide_locked: boolean;
  flight?: FlightInfo;
  entities?: [number, number, number][]; // [state, x, y] in px, IA mode only
}

export interface TargetEntry {
  id: number;
  pos: [number, number];
  valued: boolean;
  value: number | null;
  evaluations: number;
  support: Record<string, number>;
  abandoned_by: number[];
  in_range_of: number[];
}

export interface AssignmentEntry {
  id: number;
  kind: string;
  collective: number;
  target: number | null;
  status: "active" | "completed" | "cancelled";
}

export interface SystemMessageEntry {
  t: number;
  severity: "info" | "illegal";
  text: string;
  cause: string | null;
}

export interface ProbeEntry {
  index: number;
  level: string;
  template: string;
  subject: Record<string, number>;
  ask_time: number;
  text?: string;
}

export interface Snapshot {
  seq: number;
  t: number;
  collectives: CollectiveEntry[];
  targets: TargetEntry[];
  assignments: AssignmentEntry[];
  messages: SystemMessageEntry[];
  probes: ProbeEntry[];
  decisions: number;
}

export type CommandKind = "investigate" | "abandon" | "decide" | "cancel_abandon";

export interface CommandMessage {
  type: "command";
  kind: CommandKind;
  collective: number;
  target?: number;
  assignment?: number;
  consumed_clicks?: number[];
}

export interface CommandResultMessage {
  type: "command_result";
  kind: CommandKind;
  collective: number;
  target: number | null;
  accepted: boolean;
  cause: string | null;
  assignment: number | null;
}

export interface ServerMessage {
  type: "hello" | "snapshot" | "diff" | "command_result" | "probe" | "trial_end" | "error";
  [key: string]: unknown;
}

export const CAUSE_TEXT: Record<string, string> = {
  out_of_range: "target is outside the collective's search region",
  unvalued_target: "target has no assigned value yet",
  insufficient_support: "less than 30% of the collective supports that target",
  decide_locked: "collective no longer accepts commands",
  other: "command not applicable",
};
