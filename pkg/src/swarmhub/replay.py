"""Rebuild a trial's state and metrics from its persisted event log.

Replay never re-simulates physics: every number the metrics pipeline needs is
carried by the events, so recomputing produces exactly the live values.
"""
from __future__ import annotations

from pathlib import Path

from . import events as ev
from .engine import ComponentResult, TrialResult
from .metrics import (COMPONENT_LEVEL_MIX, SAProbe, WindowSpan,
                      VisualizationMode, classify_interactions, global_clutter,
                      DecisionRecord, InteractionEvent, InteractionKind,
                      performance_rollup, schedule_probes, score_sa)
from .protocol import Cause, CommandKind, CommandRecord


class _ComponentState:
    """Accumulates one component's worth of events."""

    def __init__(self, index: int, start_time: float):
        self.index = index
        self.start_time = start_time
        mix = COMPONENT_LEVEL_MIX[index % len(COMPONENT_LEVEL_MIX)]
        self.probes = [SAProbe(index=i, ask_time=ask, level=level, template="", subject={})
                       for i, (ask, level) in enumerate(zip(schedule_probes(start_time), mix))]
        self.decisions: list[DecisionRecord] = []
        self.records: list[CommandRecord] = []
        self.interactions: list[InteractionEvent] = []
        self.window_spans: list[WindowSpan] = []
        self.open_windows: dict[tuple[str, int], float] = {}
        self.clutter: list[tuple[float, float]] = []
        self.mode = VisualizationMode.COLLECTIVE
        self.layout = {"highlighted": 0, "plain": 0,
                       "target_windows": 0, "collective_windows": 0}
        self.difficulty = "easy"
        self.end_reason = "unknown"
        self.end_time = start_time

    def apply(self, event: ev.SessionEvent) -> bool:
        """Returns True when the component is finished."""
        kind, p, t = event.kind, event.payload, event.t
        if kind == ev.HUB_MOVE:
            d = p["decision"]
            self.decisions.append(DecisionRecord(**d))
            self.difficulty = d["difficulty"]
        elif kind == ev.COMMAND_RESULT:
            self.records.append(CommandRecord(
                t=t, kind=CommandKind(p["command"]), collective_id=p["collective"],
                target_id=p["target"], accepted=p["accepted"],
                cause=Cause(p["cause"]) if p["cause"] else None,
                assignment_id=p["assignment"],
                support_at_issue=p["support_at_issue"],
                support_frac_at_issue=p["support_frac_at_issue"],
                was_new_abandon=p["was_new_abandon"],
                was_highest_value=p["was_highest_value"],
                decision_index=p["decision_index"],
                consumed_clicks=tuple(p["consumed_clicks"]),
            ))
        elif kind == ev.PROBE_ASKED:
            probe = self.probes[p["index"]]
            if p["status"] == "voided":
                probe.ask_time = p["rescheduled_at"]
            else:
                probe.template = p["template"]
                probe.subject = p["subject"]
                probe.ground_truth = p["ground_truth"]
                probe.ask_time = p["ask_time"]
                probe.status = "asked"
        elif kind == ev.PROBE_ANSWERED:
            probe = self.probes[p["index"]]
            probe.response = p["answer"]
            probe.response_time = p["response_time"]
            probe.status = "answered"
        elif kind == ev.UI_EVENT:
            self._apply_ui(p, t)
        elif kind == ev.TRIAL_END:
            self.end_reason = p["reason"]
            self.end_time = t
            for (wkind, subject), opened in sorted(self.open_windows.items()):
                self.window_spans.append(WindowSpan(wkind, subject, opened, t))
            self.open_windows.clear()
            for probe in self.probes:
                if probe.status == "asked":
                    probe.status = "expired"
            return True
        return False

    def _apply_ui(self, p: dict, t: float) -> None:
        kind = p.get("ui")
        if kind == "click":
            self.interactions.append(InteractionEvent(
                timestamp=t, kind=InteractionKind(p["click"]),
                subject_id=p.get("subject"),
                screen_position=tuple(p.get("pos", (0.0, 0.0))),
                click_id=p.get("click_id")))
        elif kind == "window":
            key = (p["window"], p["subject"])
            if p["action"] == "open":
                self.open_windows[key] = t
                self.interactions.append(InteractionEvent(
                    timestamp=t, kind=InteractionKind.WINDOW_OPEN,
                    subject_id=p["subject"], window_kind=p["window"]))
            else:
                opened = self.open_windows.pop(key, None)
                if opened is not None:
                    self.window_spans.append(WindowSpan(key[0], key[1], opened, t))
                self.interactions.append(InteractionEvent(
                    timestamp=t, kind=InteractionKind.WINDOW_CLOSE,
                    subject_id=p["subject"], window_kind=p["window"]))
        elif kind == "layout":
            if "mode" in p:
                self.mode = VisualizationMode(p["mode"])
            for k in self.layout:
                if k in p:
                    self.layout[k] = int(p[k])
            self._sample(t)
        elif kind == "mode":
            self.mode = VisualizationMode(p["mode"])
            self._sample(t)

    def _sample(self, t: float) -> None:
        self.clutter.append((t, global_clutter(
            self.layout["highlighted"], self.layout["plain"],
            self.layout["target_windows"], self.layout["collective_windows"],
            self.mode)))

    def finish(self, difficulty: str) -> ComponentResult:
        return ComponentResult(
            difficulty=difficulty,
            component_index=self.index,
            start_time=self.start_time,
            end_time=self.end_time,
            end_reason=self.end_reason,
            decisions=self.decisions,
            probes=self.probes,
            sa_scores=score_sa(self.probes),
            interactions=classify_interactions(self.interactions, self.records),
            rollup=performance_rollup(self.decisions, self.probes, self.window_spans),
            clutter_series=self.clutter,
        )


def replay(path: str | Path) -> TrialResult:
    """Reconstruct the TrialResult a run produced, from its log alone."""
    header, event_list = ev.read_event_log(path)
    scenario = header.get("scenario", {})
    difficulties = scenario.get("components") or ["easy", "hard"]

    log = ev.EventLog(meta={k: v for k, v in header.items()
                            if k not in ("schema", "version")})
    for e in event_list:
        log.events.append(e)
        log._seq = e.seq

    components: list[ComponentResult] = []
    state = _ComponentState(0, 0.0)
    for e in event_list:
        if state.apply(e):
            idx = len(components)
            difficulty = difficulties[idx] if idx < len(difficulties) else state.difficulty
            components.append(state.finish(difficulty))
            state = _ComponentState(len(components), state.end_time)

    if not components:
        raise ev.ReplayError("log holds no completed component", log.last_seq)

    return TrialResult(
        scenario=scenario,
        model=header.get("model", ""),
        policy=header.get("policy", ""),
        seed=header.get("seed", 0),
        components=components,
        log=log,
    )


class SnapshotReconstructor:
    """Derives console-visible state (quadrant counts, support, assignments)
    purely from the event stream; cross-checks live snapshots in tests.

    Tracks every entity's (state, target, lost) so support can be recounted
    exactly: non-lost entities favoring or committed to a target.
    """

    def __init__(self, n_collectives: int, population: int):
        self.population = population
        self.n_collectives = n_collectives
        # per entity: [state, target, lost]
        self.entities: dict[int, list[list]] = {
            c: [["uncommitted", None, False] for _ in range(population)]
            for c in range(n_collectives)}
        self.discovered: set[int] = set()
        self.evaluations: dict[int, int] = {}
        self.assignments: dict[int, dict] = {}
        self.decisions = 0

    def apply(self, event: ev.SessionEvent) -> None:
        p = event.payload
        if event.kind == ev.ENTITY_TRANSITION:
            rows = self.entities[p["collective"]]
            if p["state"] == "lost":
                for e in p["entities"]:
                    rows[e][2] = True
            else:
                tid = p["target"]
                for e in p["entities"]:
                    rows[e][0] = p["state"]
                    rows[e][1] = tid
        elif event.kind == ev.DISCOVERY:
            self.discovered.add(p["target"])
            self.evaluations[p["target"]] = p["evaluations"]
        elif event.kind == ev.COMMAND_RESULT and p["accepted"]:
            self.assignments[p["assignment"]] = {
                "kind": p["command"], "collective": p["collective"], "target": p["target"]}
        elif event.kind == ev.HUB_MOVE:
            self.decisions += 1
            c = p["collective"]
            for a in [a for a, spec in self.assignments.items() if spec["collective"] == c]:
                del self.assignments[a]
            for row in self.entities[c]:
                if not row[2]:
                    row[0] = "uncommitted"
                    row[1] = None

    def state_counts(self, c: int) -> dict[str, int]:
        counts = {"uncommitted": 0, "favoring": 0, "committed": 0, "executing": 0}
        for state, _, _ in self.entities[c]:
            counts[state] += 1
        return counts

    def support(self, c: int) -> dict[int, int]:
        table: dict[int, int] = {}
        for state, tid, lost in self.entities[c]:
            if not lost and tid is not None and state in ("favoring", "committed"):
                table[tid] = table.get(tid, 0) + 1
        return table
