"""Live operator session over a WebSocket.

One simulation task owns all state; the socket reader only enqueues messages.
Versioned JSON messages: hello, snapshot, diff, command, command_result,
probe, probe_answer, ui_event, resync. A second concurrent operator is
rejected; on disconnect the simulation pauses (configurable).
"""
from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, Response

from .collective import Model
from .engine import DT, Simulation, build_snapshot, make_policy
from .metrics import VisualizationMode
from .protocol import CommandKind, OperatorCommand
from .scenario import Scenario

PROTOCOL_VERSION = 1
FULL_SNAPSHOT_EVERY = 10

FALLBACK_PAGE = """<!doctype html>
<html><head><title>swarmhub</title></head>
<body><h1>swarmhub session service</h1>
<p>No console bundle found. Connect a client to <code>/session</code>.</p>
</body></html>"""


def snapshot_diff(prev: dict, cur: dict) -> dict:
    """Top-level keys whose value changed; the client merges them onto the
    snapshot it holds, using base_seq to detect missed frames."""
    changed = {}
    for key, value in cur.items():
        if key in ("seq", "t"):
            continue
        if prev.get(key) != value:
            changed[key] = value
    changed["seq"] = cur["seq"]
    changed["t"] = cur["t"]
    changed["base_seq"] = prev["seq"]
    return changed


class Session:
    """Single-operator simulation session."""

    def __init__(self, scenario: Scenario, model: Model, policy_name: str | None,
                 seed: int, pace: float = 1.0, pause_on_disconnect: bool = True):
        self.scenario = scenario
        self.model = model
        self.seed = seed
        self.pace = pace
        self.pause_on_disconnect = pause_on_disconnect
        self.policy_name = policy_name
        self.sim: Simulation | None = None
        self.component_index = 0
        self.connected = False
        self.mode = VisualizationMode.COLLECTIVE
        self._inbox: asyncio.Queue = asyncio.Queue()
        self._frame = 0
        self._last_snapshot: dict | None = None
        self._records_sent = 0

    def _new_component(self, start: float) -> Simulation:
        difficulty = self.scenario.components[self.component_index]
        return Simulation(self.scenario, difficulty, self.model, self.seed,
                          component_index=self.component_index,
                          policy=make_policy(self.policy_name),
                          start_time=start,
                          log=self.sim.log if self.sim else None)

    async def run(self, ws: WebSocket) -> None:
        self.sim = self.sim or self._new_component(0.0)
        reader = asyncio.create_task(self._read(ws))
        try:
            await self._frame_loop(ws)
        finally:
            reader.cancel()

    async def _read(self, ws: WebSocket) -> None:
        while True:
            msg = await ws.receive_text()
            await self._inbox.put(msg)

    async def _frame_loop(self, ws: WebSocket) -> None:
        sim = self.sim
        while True:
            frame_started = asyncio.get_event_loop().time()
            while not self._inbox.empty():
                self._apply_message(json.loads(self._inbox.get_nowait()))

            if sim.end_reason is None:
                sim.tick()
            elif self.component_index + 1 < len(self.scenario.components):
                self.component_index += 1
                self.sim = sim = self._new_component(sim.now)
                self._last_snapshot = None

            await self._send_frame(ws)
            if sim.end_reason is not None and self.component_index + 1 >= len(self.scenario.components):
                await ws.send_text(json.dumps({"type": "trial_end",
                                               "reason": sim.end_reason}))
                return
            if self.pace > 0:
                spent = asyncio.get_event_loop().time() - frame_started
                await asyncio.sleep(max(0.0, DT / self.pace - spent))

    def _apply_message(self, msg: dict) -> None:
        sim = self.sim
        mtype = msg.get("type")
        if mtype == "command":
            sim.enqueue_command(OperatorCommand(
                kind=CommandKind(msg["kind"]),
                collective_id=msg["collective"],
                target_id=msg.get("target"),
                assignment_ref=msg.get("assignment"),
                consumed_clicks=tuple(msg.get("consumed_clicks", ()))))
        elif mtype == "probe_answer":
            sim.answer_probe(msg["index"], msg["answer"])
        elif mtype == "ui_event":
            sim.ingest_ui_event(msg["payload"])
        elif mtype == "resync":
            self._last_snapshot = None

    async def _send_frame(self, ws: WebSocket) -> None:
        sim = self.sim
        self._frame += 1
        include_entities = self.mode is VisualizationMode.IA
        cur = build_snapshot(sim, include_entities=include_entities)

        records = sim.station.records
        while self._records_sent < len(records):
            r = records[self._records_sent]
            self._records_sent += 1
            await ws.send_text(json.dumps({
                "type": "command_result", "kind": r.kind.value,
                "collective": r.collective_id, "target": r.target_id,
                "accepted": r.accepted,
                "cause": r.cause.value if r.cause else None,
                "assignment": r.assignment_id,
            }))
        for probe in sim.probes:
            if probe.status == "asked" and not getattr(probe, "_announced", False):
                probe._announced = True  # type: ignore[attr-defined]
                from .metrics import TEMPLATES_BY_NAME
                await ws.send_text(json.dumps({
                    "type": "probe", "index": probe.index,
                    "level": probe.level.value, "template": probe.template,
                    "text": TEMPLATES_BY_NAME[probe.template].text,
                    "subject": probe.subject, "ask_time": probe.ask_time,
                }))

        if self._last_snapshot is None or self._frame % FULL_SNAPSHOT_EVERY == 0:
            await ws.send_text(json.dumps({"type": "snapshot", "data": cur}))
        else:
            await ws.send_text(json.dumps({"type": "diff",
                                           "data": snapshot_diff(self._last_snapshot, cur)}))
        self._last_snapshot = cur


def create_app(scenario: Scenario, model: Model, policy: str | None = None,
               seed: int | None = None, pace: float = 1.0,
               static_dir: str | Path | None = None,
               pause_on_disconnect: bool = True) -> FastAPI:
    app = FastAPI(title="swarmhub session service")
    state = {"session": None, "busy": False}
    app.state.swarmhub = state
    seed = scenario.seed if seed is None else seed

    if static_dir is None or not (Path(static_dir) / "index.html").exists():
        @app.get("/")
        def index() -> Response:
            return HTMLResponse(FALLBACK_PAGE)

    @app.get("/health")
    def health() -> dict:
        sess = state["session"]
        return {"ok": True, "connected": state["busy"],
                "sim_time": sess.sim.now if sess and sess.sim else 0.0}

    @app.websocket("/session")
    async def session_socket(ws: WebSocket) -> None:
        await ws.accept()
        if state["busy"]:
            await ws.send_text(json.dumps({"type": "error",
                                           "reason": "session already has an operator"}))
            await ws.close(code=4409)
            return
        hello_raw = await ws.receive_text()
        hello = json.loads(hello_raw)
        if hello.get("type") != "hello" or hello.get("version") != PROTOCOL_VERSION:
            await ws.send_text(json.dumps({"type": "error", "reason": "bad hello"}))
            await ws.close(code=4400)
            return

        if state["session"] is None or not pause_on_disconnect:
            state["session"] = Session(scenario, model, policy, seed, pace=pace,
                                       pause_on_disconnect=pause_on_disconnect)
        sess: Session = state["session"]
        sess.mode = VisualizationMode(hello.get("mode", "collective"))
        state["busy"] = True
        await ws.send_text(json.dumps({
            "type": "hello", "version": PROTOCOL_VERSION,
            "mode": sess.mode.value, "model": model.value,
            "components": [c.value for c in scenario.components],
        }))
        try:
            await sess.run(ws)
        except WebSocketDisconnect:
            pass
        finally:
            state["busy"] = False

    if static_dir is not None and (Path(static_dir) / "index.html").exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app


def serve(scenario: Scenario, model: Model, port: int, host: str = "127.0.0.1",
          policy: str | None = None, pace: float = 1.0,
          static_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(scenario, model, policy=policy, pace=pace, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
