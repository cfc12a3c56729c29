import { describe, expect, it } from "vitest";

import { CommandPanel } from "../src/commands.js";

describe("CommandPanel", () => {
  it("maps the selection triple onto a command message", () => {
    const panel = new CommandPanel();
    panel.arm("investigate");
    panel.selectCollective(1, 11);
    panel.selectTarget(7, 12);
    const { message, hint } = panel.commit();
    expect(hint).toBeNull();
    expect(message).toMatchObject({
      type: "command", kind: "investigate", collective: 1, target: 7,
      consumed_clicks: [11, 12],
    });
  });

  it("blocks a commit without a target", () => {
    const panel = new CommandPanel();
    panel.arm("decide");
    panel.selectCollective(0);
    const { message, hint } = panel.commit();
    expect(message).toBeNull();
    expect(hint).toMatch(/target/);
  });

  it("blocks a commit without an armed command", () => {
    const panel = new CommandPanel();
    panel.selectCollective(0);
    panel.selectTarget(3);
    expect(panel.commit().message).toBeNull();
  });

  it("keeps the target selected after a commit", () => {
    const panel = new CommandPanel();
    panel.arm("investigate");
    panel.selectCollective(1, 1);
    panel.selectTarget(7, 2);
    panel.commit();
    expect(panel.selectedTarget).toBe(7);
    const again = panel.commit();
    expect(again.message).toMatchObject({ kind: "investigate", target: 7 });
    // the original clicks were consumed by the first commit only
    expect(again.message!.consumed_clicks).toEqual([]);
  });

  it("arms exactly one command at a time", () => {
    const panel = new CommandPanel();
    panel.arm("investigate");
    panel.arm("abandon");
    expect(panel.armed).toBe("abandon");
  });

  it("cancel needs an assignment, not a target", () => {
    const panel = new CommandPanel();
    panel.arm("cancel_abandon");
    panel.selectCollective(2);
    expect(panel.commit().hint).toMatch(/assignment/);
    panel.selectAssignment(5);
    expect(panel.commit().message).toMatchObject({
      kind: "cancel_abandon", collective: 2, assignment: 5,
    });
  });
});
