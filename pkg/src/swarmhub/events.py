"""Line-delimited event log: one JSON object per line under a version header.

The log is the replay substrate: identical (seed, scenario, command trace)
must serialize to byte-identical files, so encoding goes through one
canonical dumper.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

SCHEMA = "swarmhub-events"
SCHEMA_VERSION = 1

# Payload kinds.
ENTITY_TRANSITION = "entity_transition"
DISCOVERY = "discovery"
PHASE_CHANGE = "phase_change"
COMMAND_RESULT = "command_result"
PROBE_ASKED = "probe_asked"
PROBE_ANSWERED = "probe_answered"
HUB_MOVE = "hub_move"
TRIAL_END = "trial_end"
UI_EVENT = "ui_event"

KINDS = {ENTITY_TRANSITION, DISCOVERY, PHASE_CHANGE, COMMAND_RESULT,
         PROBE_ASKED, PROBE_ANSWERED, HUB_MOVE, TRIAL_END, UI_EVENT}


class ReplayError(Exception):
    def __init__(self, message: str, last_valid_seq: int):
        super().__init__(f"{message} (last valid seq {last_valid_seq})")
        self.last_valid_seq = last_valid_seq


@dataclass
class SessionEvent:
    seq: int
    t: float
    kind: str
    payload: dict

    def encode(self) -> str:
        return dumps({"seq": self.seq, "t": self.t, "kind": self.kind, **self.payload})


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def encode_header(meta: dict) -> str:
    return dumps({"schema": SCHEMA, "version": SCHEMA_VERSION, **meta})


class EventLog:
    """Collects events in order; can be persisted as JSON lines."""

    def __init__(self, meta: dict | None = None):
        self.meta = meta or {}
        self.events: list[SessionEvent] = []
        self._seq = 0

    def emit(self, t: float, kind: str, payload: dict) -> SessionEvent:
        self._seq += 1
        ev = SessionEvent(self._seq, t, kind, payload)
        self.events.append(ev)
        return ev

    @property
    def last_seq(self) -> int:
        return self._seq

    def dump(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(encode_header(self.meta) + "\n")
            for ev in self.events:
                fh.write(ev.encode() + "\n")
        return path

    def dumps(self) -> str:
        lines = [encode_header(self.meta)]
        lines.extend(ev.encode() for ev in self.events)
        return "\n".join(lines) + "\n"


def read_event_log(path: str | Path) -> tuple[dict, list[SessionEvent]]:
    """Parse a log; raises ReplayError naming the last valid seq on corruption."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ReplayError("empty log", 0)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ReplayError(f"bad header: {exc}", 0) from exc
    if header.get("schema") != SCHEMA:
        raise ReplayError("unknown schema", 0)
    if header.get("version") != SCHEMA_VERSION:
        raise ReplayError(f"unsupported version {header.get('version')}", 0)

    events: list[SessionEvent] = []
    last = 0
    for line in lines[1:]:
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"corrupt event: {exc}", last) from exc
        try:
            seq, t, kind = obj.pop("seq"), obj.pop("t"), obj.pop("kind")
        except KeyError as exc:
            raise ReplayError(f"event missing field {exc}", last) from exc
        if kind not in KINDS:
            raise ReplayError(f"unknown event kind {kind!r}", last)
        if seq != last + 1:
            raise ReplayError(f"seq jump {last} -> {seq}", last)
        events.append(SessionEvent(seq, t, kind, obj))
        last = seq
    return header, events
