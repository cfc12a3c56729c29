"""Session service: websocket protocol round trips."""
from __future__ import annotations

import json

from fastapi.testclient import TestClient

from swarmhub.collective import Model
from swarmhub.metrics import DEFAULT_CLUTTER
from swarmhub.scenario import Scenario
from swarmhub.server import create_app
from swarmhub.world import Difficulty


def make_client(model=Model.M3, seed=71, **scenario_kw):
    sc = Scenario(seed=seed, components=[Difficulty.EASY], **scenario_kw)
    app = create_app(sc, model, pace=0.0)
    return TestClient(app), app


def hello(ws, mode="collective"):
    ws.send_text(json.dumps({"type": "hello", "version": 1, "mode": mode}))
    msg = json.loads(ws.receive_text())
    assert msg["type"] == "hello"
    return msg


def collect_until(ws, want, limit=400):
    """Read frames until a message of the wanted type arrives."""
    seen = []
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        seen.append(msg)
        if msg["type"] == want:
            return msg, seen
    raise AssertionError(f"no {want} within {limit} messages")


def latest_state(seen):
    state: dict = {}
    for msg in seen:
        if msg["type"] in ("snapshot", "diff"):
            state.update(msg["data"])
    return state


class TestSessionProtocol:
    def test_hello_then_snapshots_flow(self):
        client, _ = make_client()
        with client.websocket_connect("/session") as ws:
            greeting = hello(ws)
            assert greeting["model"] == "M3"
            snap, _ = collect_until(ws, "snapshot")
            assert snap["data"]["seq"] >= 0
            assert "collectives" in snap["data"]

    def test_bad_hello_rejected(self):
        client, _ = make_client()
        with client.websocket_connect("/session") as ws:
            ws.send_text(json.dumps({"type": "hello", "version": 99}))
            msg = json.loads(ws.receive_text())
            assert msg["type"] == "error"

    def test_command_round_trip_within_two_snapshots(self):
        client, app = make_client()
        with client.websocket_connect("/session") as ws:
            hello(ws)
            snap, seen = collect_until(ws, "snapshot")
            state = latest_state(seen)
            # wait for a valued target to exist
            for _ in range(600):
                msg = json.loads(ws.receive_text())
                if msg["type"] in ("snapshot", "diff"):
                    state.update(msg["data"])
                valued = [t for t in state.get("targets", [])
                          if t["valued"] and 0 in t["in_range_of"]]
                if valued:
                    break
            assert valued, "no valued target in range of collective I appeared"
            target = valued[0]["id"]
            ws.send_text(json.dumps({"type": "command", "kind": "investigate",
                                     "collective": 0, "target": target}))
            result, seen2 = collect_until(ws, "command_result")
            assert result["accepted"] is True
            snapshots_after = 0
            found = False
            while snapshots_after < 2:
                msg = json.loads(ws.receive_text())
                if msg["type"] in ("snapshot", "diff"):
                    snapshots_after += 1
                    state.update(msg["data"])
                    entries = [a for a in state.get("assignments", [])
                               if a["kind"] == "investigate" and a["target"] == target]
                    if entries:
                        found = True
                        break
            assert found, "accepted command not visible in assignments"

    def test_illegal_command_surfaces_cause(self):
        client, _ = make_client()
        with client.websocket_connect("/session") as ws:
            hello(ws)
            collect_until(ws, "snapshot")
            # decide with no support is insufficient_support
            ws.send_text(json.dumps({"type": "command", "kind": "decide",
                                     "collective": 0, "target": 0}))
            result, _ = collect_until(ws, "command_result")
            assert result["accepted"] is False
            assert result["cause"] in ("insufficient_support", "other")
            msg, seen = collect_until(ws, "snapshot")
            state = latest_state(seen + [msg])
            illegal = [m for m in state.get("messages", []) if m["severity"] == "illegal"]
            assert illegal and illegal[-1]["cause"] == result["cause"]

    def test_resync_yields_full_snapshot(self):
        # Deterministic at the session level: diff frames resume only after a
        # fresh full snapshot once the client requests a resync.
        import asyncio

        from swarmhub.server import Session

        class StubWs:
            def __init__(self):
                self.sent = []

            async def send_text(self, text):
                self.sent.append(json.loads(text))

        async def scenario_body():
            sc = Scenario(seed=71, components=[Difficulty.EASY])
            session = Session(sc, Model.M3, None, 71, pace=0.0)
            session.sim = session._new_component(0.0)
            ws = StubWs()
            await session._send_frame(ws)     # first frame: full
            await session._send_frame(ws)     # second: diff
            session._apply_message({"type": "resync"})
            await session._send_frame(ws)     # after resync: full again
            kinds = [m["type"] for m in ws.sent if m["type"] in ("snapshot", "diff")]
            assert kinds == ["snapshot", "diff", "snapshot"]

        asyncio.run(scenario_body())

    def test_second_operator_rejected(self):
        client, _ = make_client()
        with client.websocket_connect("/session") as ws1:
            hello(ws1)
            with client.websocket_connect("/session") as ws2:
                msg = json.loads(ws2.receive_text())
                assert msg["type"] == "error"

    def test_ui_telemetry_feeds_clutter(self):
        client, app = make_client()
        with client.websocket_connect("/session") as ws:
            hello(ws)
            collect_until(ws, "snapshot")
            ws.send_text(json.dumps({"type": "ui_event", "payload": {
                "ui": "layout", "mode": "ia", "highlighted": 2, "plain": 3,
                "target_windows": 1, "collective_windows": 1}}))
            collect_until(ws, "snapshot")
            collect_until(ws, "snapshot")
        session = app.state.swarmhub["session"]
        values = [v for _, v in session.sim.clutter_series]
        k = DEFAULT_CLUTTER
        expected = (k.static_components + k.hub_icons + 2 * k.highlighted_target
                    + 3 * k.plain_target + k.entity_dots + k.target_window
                    + k.collective_window) / k.screen_area * 100.0
        assert any(abs(v - expected) < 1e-9 for v in values)

    def test_ia_mode_includes_entities(self):
        client, _ = make_client()
        with client.websocket_connect("/session") as ws:
            hello(ws, mode="ia")
            snap, _ = collect_until(ws, "snapshot")
            assert "entities" in snap["data"]["collectives"][0]

    def test_disconnect_pauses_and_reconnect_resumes(self):
        client, app = make_client()
        with client.websocket_connect("/session") as ws:
            hello(ws)
            collect_until(ws, "snapshot")
        session = app.state.swarmhub["session"]
        paused_at = session.sim.now
        assert paused_at > 0.0
        with client.websocket_connect("/session") as ws:
            hello(ws)
            snap, _ = collect_until(ws, "snapshot")
        assert app.state.swarmhub["session"] is session
        assert session.sim.now >= paused_at  # same run continued, not reset

    def test_health_endpoint(self):
        client, _ = make_client()
        assert client.get("/health").json()["ok"] is True
        assert "swarmhub" in client.get("/").text
