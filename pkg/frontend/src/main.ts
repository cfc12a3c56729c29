/** Browser entry point: wires the session client to a canvas and the panel.
 * The visualization mode comes from the query string (?mode=ia|collective). */

import { SessionClient } from "./client.js";
import { buildFrame, DrawOp } from "./render.js";
import type { CommandKind, Mode } from "./protocol.js";

const MAP_W = 1920;
const MAP_H = 1080;

function pickMode(): Mode {
  const q = new URLSearchParams(window.location.search).get("mode");
  return q === "ia" ? "ia" : "collective";
}

function pickTargetLetters(): boolean {
  return new URLSearchParams(window.location.search).get("targets") === "letters";
}

function paint(ctx: CanvasRenderingContext2D, ops: DrawOp[]): void {
  ctx.clearRect(0, 0, MAP_W, MAP_H);
  ctx.fillStyle = "#1b1f23";
  ctx.fillRect(0, 0, MAP_W, MAP_H);
  for (const op of ops) {
    if (op.op === "entity") {
      ctx.fillStyle = op.color;
      ctx.fillRect(op.x - 2, op.y - 2, 4, 4);
    } else if (op.op === "target") {
      ctx.globalAlpha = op.opacity;
      ctx.fillStyle = op.fill;
      ctx.beginPath();
      ctx.arc(op.x, op.y, 14, 0, Math.PI * 2);
      ctx.fill();
      ctx.globalAlpha = 1;
      if (op.supportOpacity > 0) {
        ctx.globalAlpha = op.supportOpacity;
        ctx.fillStyle = "#1a73e8";
        ctx.fillRect(op.x - 14, op.y + 8, 28, 8);
        ctx.globalAlpha = 1;
      }
      if (op.outline) {
        ctx.strokeStyle = op.outline;
        ctx.lineWidth = op.selected ? 4 : 2;
        ctx.stroke();
      }
      ctx.fillStyle = "#ffffff";
      ctx.font = "12px sans-serif";
      ctx.fillText(op.label, op.x - 4, op.y + 4);
    } else if (op.op === "hub") {
      const [ox, oy] = op.outlineAt;
      ctx.strokeStyle = "#9aa0a6";
      ctx.strokeRect(ox - 22, oy - 22, 44, 44);
      op.quadrants.forEach((b, i) => {
        const qx = ox - 22 + (i % 2) * 22;
        const qy = oy - 22 + Math.floor(i / 2) * 22;
        ctx.fillStyle = `rgba(255,255,255,${b.toFixed(3)})`;
        ctx.fillRect(qx, qy, 22, 22);
      });
      ctx.fillStyle = "#ffd600";
      ctx.font = "14px sans-serif";
      ctx.fillText(op.label, op.x - 8, op.y - 28);
    } else if (op.op === "window") {
      ctx.fillStyle = "rgba(30,33,36,0.92)";
      ctx.fillRect(op.x, op.y, 150, 18 + op.lines.length * 16);
      ctx.strokeStyle = "#5f6368";
      ctx.strokeRect(op.x, op.y, 150, 18 + op.lines.length * 16);
      ctx.fillStyle = "#e8eaed";
      ctx.font = "12px sans-serif";
      ctx.fillText(`${op.kind} ${op.subject}`, op.x + 6, op.y + 13);
      op.lines.forEach((line, i) => {
        ctx.fillText(line, op.x + 6, op.y + 30 + i * 16);
      });
    }
  }
}

function nearestSubject(client: SessionClient, x: number, y: number):
    { kind: "target" | "collective"; id: number } | null {
  const snap = client.state.snapshot;
  if (!snap) return null;
  for (const t of snap.targets) {
    if (Math.hypot(t.pos[0] - x, t.pos[1] - y) <= 16) return { kind: "target", id: t.id };
  }
  for (const c of snap.collectives) {
    if (Math.abs(c.hub[0] - x) <= 24 && Math.abs(c.hub[1] - y) <= 24) {
      return { kind: "collective", id: c.id };
    }
  }
  return null;
}

function renderPanel(client: SessionClient): void {
  const log = document.getElementById("assignments")!;
  const snap = client.state.snapshot;
  log.innerHTML = (snap?.assignments ?? [])
    .map((a) => `<li data-id="${a.id}">#${a.id} ${a.kind} ${a.target ?? ""} → ` +
                `${"IVXL".includes("") ? "" : ""}collective ${a.collective} [${a.status}]</li>`)
    .join("");
  const messages = document.getElementById("messages")!;
  messages.innerHTML = (snap?.messages ?? [])
    .map((m) => `<li class="${m.severity}">${m.severity === "illegal" ? "⚠ " : ""}${m.text}</li>`)
    .join("");
  const probeBox = document.getElementById("probe")!;
  if (client.probes.active) {
    probeBox.textContent = client.probes.active.text ?? client.probes.active.template;
    (probeBox.parentElement as HTMLElement).style.display = "block";
  } else {
    (probeBox.parentElement as HTMLElement).style.display = "none";
  }
  const hint = document.getElementById("hint")!;
  hint.textContent = client.localHint ?? client.trialOver ?? "";
}

export function start(): void {
  const mode = pickMode();
  const canvas = document.getElementById("map") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const url = `ws://${window.location.host}/session`;
  const socket = new WebSocket(url);

  const targetLetters = pickTargetLetters();
  const client = new SessionClient(mode, socket, () => {
    const snap = client.state.snapshot;
    if (snap) {
      paint(ctx, buildFrame(snap, {
        mode,
        selectedCollective: client.panel.selectedCollective,
        selectedTarget: client.panel.selectedTarget,
        windowPositions: client.windows.positions,
        targetLetters,
      }));
    }
    renderPanel(client);
  });

  socket.onopen = () => client.hello();
  socket.onmessage = (e) => client.handleMessage(e.data as string);

  canvas.addEventListener("click", (e) => {
    const subject = nearestSubject(client, e.offsetX, e.offsetY);
    if (!subject) return;
    if (subject.kind === "target") client.clickTarget(subject.id, [e.offsetX, e.offsetY]);
    else client.clickCollective(subject.id, [e.offsetX, e.offsetY]);
  });
  canvas.addEventListener("contextmenu", (e) => {
    e.preventDefault();
    const subject = nearestSubject(client, e.offsetX, e.offsetY);
    if (subject) client.rightClick(subject.kind, subject.id, [e.offsetX, e.offsetY]);
  });

  for (const kind of ["investigate", "abandon", "decide", "cancel_abandon"] as CommandKind[]) {
    document.getElementById(`cmd-${kind}`)?.addEventListener("click", () => {
      client.panel.arm(kind);
      document.querySelectorAll(".cmd").forEach((b) => b.classList.remove("armed"));
      document.getElementById(`cmd-${kind}`)?.classList.add("armed");
    });
  }
  document.getElementById("commit")?.addEventListener("click", () => client.commit());
  document.getElementById("assignments")?.addEventListener("click", (e) => {
    const li = (e.target as HTMLElement).closest("li");
    if (li) client.panel.selectAssignment(Number(li.dataset.id));
  });
  document.getElementById("probe-send")?.addEventListener("click", () => {
    const input = document.getElementById("probe-answer") as HTMLInputElement;
    client.answerProbe(input.value);
    input.value = "";
  });
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", start);
}
