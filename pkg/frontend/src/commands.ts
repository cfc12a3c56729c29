/** Command panel state machine: arm a command, pick collective and target,
 * commit. The target stays selected after a commit so reissuing the same
 * command is one click. */

import type { CommandKind, CommandMessage } from "./protocol.js";

export interface CommitOutcome {
  message: CommandMessage | null;
  hint: string | null;
}

const NEEDS_TARGET: Record<CommandKind, boolean> = {
  investigate: true,
  abandon: true,
  decide: true,
  cancel_abandon: false,
};

export class CommandPanel {
  armed: CommandKind | null = null;
  selectedCollective: number | null = null;
  selectedTarget: number | null = null;
  selectedAssignment: number | null = null;
  lastCollectiveClick: number | null = null;
  lastTargetClick: number | null = null;

  arm(kind: CommandKind): void {
    this.armed = kind; // exactly one armed command at a time
  }

  selectCollective(id: number, clickId: number | null = null): void {
    this.selectedCollective = id;
    if (clickId !== null) this.lastCollectiveClick = clickId;
  }

  selectTarget(id: number, clickId: number | null = null): void {
    this.selectedTarget = id;
    if (clickId !== null) this.lastTargetClick = clickId;
  }

  selectAssignment(id: number): void {
    this.selectedAssignment = id;
  }

  commit(): CommitOutcome {
    if (this.armed === null) {
      return { message: null, hint: "select a command first" };
    }
    if (this.selectedCollective === null) {
      return { message: null, hint: "select a collective" };
    }
    if (this.armed === "cancel_abandon") {
      if (this.selectedAssignment === null) {
        return { message: null, hint: "select an abandon assignment to cancel" };
      }
      return {
        message: {
          type: "command", kind: this.armed,
          collective: this.selectedCollective,
          assignment: this.selectedAssignment,
          consumed_clicks: this.consumedClicks(),
        },
        hint: null,
      };
    }
    if (NEEDS_TARGET[this.armed] && this.selectedTarget === null) {
      return { message: null, hint: "select a target" };
    }
    const message: CommandMessage = {
      type: "command", kind: this.armed,
      collective: this.selectedCollective,
      target: this.selectedTarget ?? undefined,
      consumed_clicks: this.consumedClicks(),
    };
    // Selection survives the commit; only the click consumption resets.
    this.lastCollectiveClick = null;
    this.lastTargetClick = null;
    return { message, hint: null };
  }

  private consumedClicks(): number[] {
    const out: number[] = [];
    if (this.lastCollectiveClick !== null) out.push(this.lastCollectiveClick);
    if (this.lastTargetClick !== null) out.push(this.lastTargetClick);
    return out;
  }
}
