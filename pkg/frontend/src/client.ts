/** Session client: socket lifecycle, message dispatch, resync requests. */

import { CommandPanel } from "./commands.js";
import { ProbePrompter } from "./probes.js";
import type {
  CommandResultMessage,
  Mode,
  ProbeEntry,
  ServerMessage,
  Snapshot,
} from "./protocol.js";
import { CAUSE_TEXT, PROTOCOL_VERSION } from "./protocol.js";
import { SessionState } from "./state.js";
import { deriveLayoutCounts, Telemetry } from "./telemetry.js";
import { WindowManager } from "./windows.js";

export interface SocketLike {
  send(data: string): void;
  readyState: number;
}

const OPEN = 1;

export class SessionClient {
  readonly state = new SessionState();
  readonly panel = new CommandPanel();
  readonly windows = new WindowManager();
  readonly probes = new ProbePrompter();
  readonly telemetry: Telemetry;
  readonly commandLog: CommandResultMessage[] = [];
  localHint: string | null = null;
  trialOver: string | null = null;

  constructor(
    public mode: Mode,
    private socket: SocketLike,
    private onFrame: () => void = () => {},
  ) {
    this.telemetry = new Telemetry((payload) => {
      if (this.socket.readyState !== OPEN) return false;
      this.socket.send(JSON.stringify({ type: "ui_event", payload }));
      return true;
    });
  }

  attach(socket: SocketLike): void {
    this.socket = socket;
    this.telemetry.flush();
  }

  hello(): void {
    this.socket.send(JSON.stringify({ type: "hello", version: PROTOCOL_VERSION, mode: this.mode }));
  }

  handleMessage(raw: string): void {
    const msg = JSON.parse(raw) as ServerMessage;
    switch (msg.type) {
      case "snapshot":
        this.state.applyFull(msg.data as Snapshot);
        this.afterSnapshot();
        break;
      case "diff":
        this.state.applyDiff(msg.data as Snapshot & { base_seq?: number });
        if (this.state.needsResync) {
          this.socket.send(JSON.stringify({ type: "resync" }));
        } else {
          this.afterSnapshot();
        }
        break;
      case "command_result":
        this.commandLog.push(msg as unknown as CommandResultMessage);
        break;
      case "probe":
        this.probes.show(msg as unknown as ProbeEntry, this.state.snapshot?.t ?? 0);
        break;
      case "trial_end":
        this.trialOver = String(msg.reason ?? "done");
        break;
      default:
        break;
    }
  }

  private afterSnapshot(): void {
    const snap = this.state.snapshot;
    if (snap) {
      this.telemetry.layout(
        deriveLayoutCounts(snap, this.panel.selectedCollective, this.windows.openKeys()),
        this.mode,
      );
    }
    this.onFrame();
  }

  /** Latest illegal-command explanation for the system messages area. */
  lastIllegalText(): string | null {
    for (let i = this.commandLog.length - 1; i >= 0; i--) {
      const entry = this.commandLog[i];
      if (!entry.accepted) {
        return entry.cause ? CAUSE_TEXT[entry.cause] ?? entry.cause : "command rejected";
      }
    }
    return null;
  }

  clickCollective(id: number, pos: [number, number]): void {
    const clickId = this.telemetry.click("collective", "left", id, pos);
    this.panel.selectCollective(id, clickId);
    this.afterSnapshot();
  }

  clickTarget(id: number, pos: [number, number]): void {
    const clickId = this.telemetry.click("target", "left", id, pos);
    this.panel.selectTarget(id, clickId);
  }

  rightClick(kind: "target" | "collective", subject: number, pos: [number, number]): void {
    this.telemetry.click(kind, "right", subject, pos);
    const open = this.windows.toggle(kind, subject, pos);
    this.telemetry.windowToggle(kind, subject, open, pos);
    this.afterSnapshot();
  }

  dragWindow(kind: "target" | "collective", subject: number, to: [number, number]): void {
    this.windows.drag(kind, subject, to);
    this.telemetry.windowDrag(kind, subject, to);
  }

  commit(): void {
    const { message, hint } = this.panel.commit();
    this.localHint = hint;
    if (message) this.socket.send(JSON.stringify(message));
  }

  answerProbe(value: unknown): void {
    const msg = this.probes.answer(value);
    if (msg) this.socket.send(JSON.stringify(msg));
  }
}
