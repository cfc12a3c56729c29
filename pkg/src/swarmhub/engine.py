"""Deterministic 10 Hz simulation loop, scripted operator policies, and the
headless trial runner.

One engine thread owns all mutable state. Networked sessions and scripts feed
the same command queue the policies use, so every run reduces to
(seed, scenario, command trace) -> event log.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import events as ev
from .collective import (AssessmentNote, Collective, EntityState, Model,
                         Phase, PhaseNote, StateChange)
from .metrics import (COMPONENT_LEVEL_MIX, PROBE_INTERVAL_S, PROBE_TEMPLATES,
                      SAProbe, SimView, CollectiveView, WindowSpan,
                      VisualizationMode, classify_interactions, global_clutter,
                      ground_truth_answer, DecisionRecord, InteractionEvent,
                      InteractionKind, performance_rollup, schedule_probes,
                      score_sa)
from .protocol import CommandKind, CommandStation, OperatorCommand
from .scenario import Scenario
from .world import (PX_PER_M, ROMAN_LABELS, Difficulty, World,
                    generate_targets, meters_to_px, trial_should_end)

DT = 0.1
SAMPLE_PERIOD_S = 1.0


# ----------------------------------------------------------------------
# Operator policies
# ----------------------------------------------------------------------

class OperatorPolicy:
    name = "null"

    def on_tick(self, sim: "Simulation", now: float) -> None:  # pragma: no cover
        pass


class NullPolicy(OperatorPolicy):
    name = "null"


class GreedyBestPolicy(OperatorPolicy):
    """Pushes each collective onto its best available target, then decides.

    Waits for the target to be discovered and valued, frees entities stuck on
    decoys when the uncommitted pool runs dry, and holds its decide while
    another collective is flying at the same target so hubs never merge.
    """

    name = "greedy"

    def __init__(self, cadence: float = 1.5):
        self.cadence = cadence
        self._last_cmd: dict[int, float] = {}
        self._claims: dict[int, tuple[int, float]] = {}

    def on_tick(self, sim: "Simulation", now: float) -> None:
        for col in sim.collectives.values():
            if col.decide_locked or col.phase in (Phase.EXECUTING, Phase.DECIDED):
                continue
            if now - self._last_cmd.get(col.id, -1e9) < self.cadence:
                continue
            best_id, _ = sim.world.ground_truth_best(col.hub)
            if best_id is None:
                continue
            contested = sim.targets_in_flight(exclude=col.id) | self._pending_claims(sim, col.id)
            push = best_id
            allow_decide = True
            if best_id in contested:
                # Another hub is about to take the best; build support on the
                # runner-up but hold the decide until the claim resolves.
                push = self._runner_up(col, sim, exclude=best_id)
                allow_decide = False
                if push is None:
                    continue
            target = sim.world.targets[push]
            if not target.valued or push in col.abandoned:
                continue
            threshold = col.params.quorum_commit * col.live_population
            if col.support_count(push) >= threshold:
                if allow_decide:
                    sim.enqueue_command(OperatorCommand(CommandKind.DECIDE, col.id, push))
                    self._claims[col.id] = (push, now)
                    self._last_cmd[col.id] = now
                continue
            unc = col.state_counts()["uncommitted"]
            if unc < max(10, 0.08 * col.live_population):
                rival = self._largest_rival(col, push, sim)
                if rival is not None:
                    sim.enqueue_command(OperatorCommand(CommandKind.ABANDON, col.id, rival))
                    self._last_cmd[col.id] = now
                    continue
            sim.enqueue_command(OperatorCommand(CommandKind.INVESTIGATE, col.id, push))
            self._last_cmd[col.id] = now

    def _pending_claims(self, sim: "Simulation", cid: int) -> set[int]:
        """Decides issued but not yet reflected in the flight list.

        A claim outlives the one-tick command latency; it goes stale only
        once the claimant is demonstrably back to deliberating.
        """
        stale = [c for c, (_, at) in self._claims.items()
                 if sim.now - at > 1.0
                 and sim.collectives[c].phase in (Phase.DECIDED, Phase.DELIBERATING)
                 and not sim.collectives[c].decide_locked]
        for c in stale:
            del self._claims[c]
        return {t for c, (t, _) in self._claims.items() if c != cid}

    def _runner_up(self, col: Collective, sim: "Simulation", exclude: int) -> int | None:
        best, best_value = None, -1
        mask = sim.world.in_range_mask(col.hub) & ~sim.world.occupied
        for tid in map(int, np.flatnonzero(mask)):
            if tid == exclude:
                continue
            v = int(sim.world.values[tid])
            if v > best_value:
                best, best_value = tid, v
        return best

    @staticmethod
    def _largest_rival(col: Collective, best_id: int, sim: "Simulation") -> int | None:
        rival, rival_support = None, 0
        for tid, s in col.support.items():
            if tid == best_id or tid in col.abandoned:
                continue
            if s > rival_support and sim.world.targets[tid].valued:
                rival, rival_support = tid, s
        return rival


class ConsensusBoostPolicy(OperatorPolicy):
    """Light touch on top of an autonomous model: a single investigate toward
    the best valued target, then a decide as soon as the collective commits."""

    name = "consensus"

    def __init__(self):
        self._nudged: dict[tuple[int, int], bool] = {}

    def on_tick(self, sim: "Simulation", now: float) -> None:
        for col in sim.collectives.values():
            if col.decide_locked or col.phase in (Phase.EXECUTING, Phase.DECIDED):
                continue
            key = (col.id, col.decisions_made)
            if col.phase is Phase.COMMITTED and col.phase_target is not None:
                if col.phase_target not in sim.targets_in_flight():
                    sim.enqueue_command(OperatorCommand(CommandKind.DECIDE, col.id,
                                                        int(col.phase_target)))
                continue
            if self._nudged.get(key):
                continue
            best_id, _ = sim.world.ground_truth_best(col.hub)
            if best_id is None or not sim.world.targets[best_id].valued:
                continue
            sim.enqueue_command(OperatorCommand(CommandKind.INVESTIGATE, col.id, best_id))
            self._nudged[key] = True


POLICIES = {
    "null": NullPolicy,
    "greedy": GreedyBestPolicy,
    "consensus": ConsensusBoostPolicy,
}


def make_policy(name: str | None) -> OperatorPolicy:
    if name is None:
        return NullPolicy()
    try:
        return POLICIES[name]()
    except KeyError as exc:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from exc


# ----------------------------------------------------------------------
# Simulation of one trial component
# ----------------------------------------------------------------------

@dataclass
class ComponentResult:
    difficulty: str
    component_index: int
    start_time: float
    end_time: float
    end_reason: str
    decisions: list[DecisionRecord]
    probes: list[SAProbe]
    sa_scores: dict
    interactions: dict
    rollup: dict
    clutter_series: list[tuple[float, float]]
    snapshots: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "difficulty": self.difficulty,
            "component_index": self.component_index,
            "start_time": self.start_time,
            "end_time": self.end_time,
            "end_reason": self.end_reason,
            "decisions": [vars(d).copy() for d in self.decisions],
            "probes": [
                {
                    "index": p.index, "ask_time": p.ask_time, "level": p.level.value,
                    "template": p.template, "subject": p.subject,
                    "ground_truth": p.ground_truth, "response": p.response,
                    "response_time": p.response_time, "status": p.status,
                    "correct": p.correct,
                }
                for p in self.probes
            ],
            "sa_scores": self.sa_scores,
            "interactions": self.interactions,
            "rollup": self.rollup,
            "clutter_series": [[t, v] for t, v in self.clutter_series],
        }


class Simulation:
    """One component: four collectives, sixteen fresh targets, ten-ish minutes."""

    def __init__(self, scenario: Scenario, difficulty: Difficulty, model: Model,
                 seed: int, component_index: int = 0,
                 policy: OperatorPolicy | None = None,
                 log: ev.EventLog | None = None,
                 start_time: float = 0.0,
                 probe_responder: str = "none",
                 script: list[dict] | None = None,
                 collect_snapshots: bool = False):
        self.scenario = scenario
        self.difficulty = difficulty
        self.model = model
        self.seed = seed
        self.component_index = component_index
        self.policy = policy or NullPolicy()
        self.probe_responder = probe_responder
        self.collect_snapshots = collect_snapshots

        self.config = scenario.trial_config(difficulty, seed)
        ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, component_index])
        children = ss.spawn(2 + self.config.n_collectives)
        world_rng = np.random.Generator(np.random.PCG64(children[0]))
        self.probe_rng = np.random.Generator(np.random.PCG64(children[1]))

        explicit = scenario.targets()
        hubs = scenario.hubs(self.config.n_collectives)
        if explicit is not None:
            self.world = World.from_explicit(self.config, explicit, hubs)
        else:
            self.world = World(generate_targets(self.config, world_rng, hubs), hubs, self.config)

        params = scenario.params(model)
        self.collectives: dict[int, Collective] = {}
        for i in range(self.config.n_collectives):
            rng = np.random.Generator(np.random.PCG64(children[2 + i]))
            label = ROMAN_LABELS[i] if i < len(ROMAN_LABELS) else str(i + 1)
            self.collectives[i] = Collective(i, label, self.world.hubs[i],
                                             self.config.population, model, params,
                                             rng, self.world)
        self.station = CommandStation(self.world, self.collectives)

        self.log = log if log is not None else ev.EventLog(meta={
            "scenario": scenario.to_dict(), "model": model.value, "seed": seed,
        })
        self.start_time = start_time
        self.now = start_time
        self.tick_index = 0
        self.end_reason: str | None = None

        self._queue: list[OperatorCommand] = []
        self._arrivals: list[tuple[float, int, int, dict]] = []
        self.decisions: list[DecisionRecord] = []
        for col in self.collectives.values():
            col.deliberation_start = start_time

        mix = COMPONENT_LEVEL_MIX[component_index % len(COMPONENT_LEVEL_MIX)]
        self.probes: list[SAProbe] = []
        for i, (ask, level) in enumerate(zip(schedule_probes(start_time), mix)):
            self.probes.append(SAProbe(index=i, ask_time=ask, level=level,
                                       template="", subject={}))
        self._probe_answers_due: list[tuple[float, int]] = []

        self._support_times: list[float] = []
        self._support_samples: list[np.ndarray] = []
        self._next_sample = start_time

        self.mode = VisualizationMode.COLLECTIVE
        self.layout_counts = {"highlighted": 0, "plain": 0,
                              "target_windows": 0, "collective_windows": 0}
        self.clutter_series: list[tuple[float, float]] = []
        self.interactions: list[InteractionEvent] = []
        self.window_spans: list[WindowSpan] = []
        self._open_windows: dict[tuple[str, int], float] = {}
        self.snapshots: list[dict] = []

        self.script = sorted(script or [], key=lambda item: item["t"])
        self._script_pos = 0
        self._sample_support()
        # Baseline layout sample goes through the log so replay sees it too.
        self.ingest_ui_event({"ui": "layout", "mode": self.mode.value,
                              **self.layout_counts})

    # ------------------------------ plumbing ------------------------------

    def enqueue_command(self, cmd: OperatorCommand) -> None:
        self._queue.append(cmd)

    def targets_in_flight(self, exclude: int | None = None) -> set[int]:
        flying = {tid for (_, cid, tid, _) in self._arrivals if cid != exclude}
        flying.update(int(t) for t in np.flatnonzero(self.world.occupied))
        return flying

    def emit(self, kind: str, payload: dict) -> None:
        self.log.emit(round(self.now, 6), kind, payload)

    def _emit_notes(self, cid: int, notes: list) -> None:
        for note in notes:
            if isinstance(note, StateChange):
                state = ("lost" if note.to_state is None
                         else EntityState(note.to_state).name.lower())
                self.emit(ev.ENTITY_TRANSITION, {
                    "collective": cid, "entities": note.entities,
                    "state": state, "target": note.target_id, "reason": note.reason,
                })
            elif isinstance(note, AssessmentNote):
                self.emit(ev.DISCOVERY, {
                    "collective": cid, "entity": note.entity, "target": note.target_id,
                    "first": note.first_discovery, "evaluations": note.evaluations,
                })
            elif isinstance(note, PhaseNote):
                self.emit(ev.PHASE_CHANGE, {
                    "collective": cid, "phase": note.phase.value,
                    "target": note.target_id, "cause": note.cause,
                })
                if note.phase is Phase.EXECUTING:
                    self._schedule_arrival(cid, note.target_id, note.cause)

    # ------------------------------ main loop ------------------------------

    def run(self) -> ComponentResult:
        while self.end_reason is None:
            self.tick()
        return self._finish()

    def tick(self) -> None:
        if self.end_reason is not None:
            return
        self.tick_index += 1
        # Rounded so logged timestamps and live timestamps are bit-identical.
        self.now = round(self.start_time + self.tick_index * DT, 6)

        self._run_script()
        self._drain_commands()
        self.policy.on_tick(self, self.now)

        notes: list = []
        for cid in sorted(self.collectives):
            notes.clear()
            self.collectives[cid].step(self.now, DT, notes)
            if notes:
                self._emit_notes(cid, notes)

        self._resolve_arrivals()
        if self.end_reason is not None:
            return
        self._service_probes()

        if self.now >= self._next_sample:
            self._sample_support()
            if self.collect_snapshots:
                self.snapshots.append(build_snapshot(self))
            self._next_sample += SAMPLE_PERIOD_S

        elapsed = self.now - self.start_time
        if self.end_reason is None and elapsed >= self.config.max_sim_time:
            self._end("max_sim_time")

    def _run_script(self) -> None:
        while self._script_pos < len(self.script) and self.script[self._script_pos]["t"] <= self.now:
            item = self.script[self._script_pos]
            self._script_pos += 1
            if "command" in item:
                c = item["command"]
                self.enqueue_command(OperatorCommand(
                    kind=CommandKind(c["kind"]), collective_id=c["collective"],
                    target_id=c.get("target"), assignment_ref=c.get("assignment"),
                    consumed_clicks=tuple(c.get("consumed_clicks", ()))))
            elif "ui" in item:
                self.ingest_ui_event(item["ui"])
            elif "probe_answer" in item:
                pa = item["probe_answer"]
                self.answer_probe(pa["index"], pa["answer"])

    def _drain_commands(self) -> None:
        queue, self._queue = self._queue, []
        for cmd in queue:
            verdict, record, notes = self.station.process(cmd, self.now)
            self.emit(ev.COMMAND_RESULT, {
                "command": record.kind.value, "collective": record.collective_id,
                "target": record.target_id, "accepted": record.accepted,
                "cause": record.cause.value if record.cause else None,
                "assignment": record.assignment_id,
                "support_at_issue": record.support_at_issue,
                "support_frac_at_issue": record.support_frac_at_issue,
                "was_new_abandon": record.was_new_abandon,
                "was_highest_value": record.was_highest_value,
                "decision_index": record.decision_index,
                "consumed_clicks": list(record.consumed_clicks),
            })
            if notes:
                self._emit_notes(cmd.collective_id, notes)
                col = self.collectives.get(cmd.collective_id)
                if col is not None and not col.decide_locked:
                    extra: list = []
                    col.detect_quorum(self.now, extra)
                    if extra:
                        self._emit_notes(cmd.collective_id, extra)

    def _schedule_arrival(self, cid: int, tid: int, cause: str) -> None:
        col = self.collectives[cid]
        dist = float(np.linalg.norm(col.hub - self.world.positions[tid]))
        arrival = self.now + dist / col.params.entity_speed
        best_id, best_value = self.world.ground_truth_best(col.hub)
        draft = {
            "start": col.deliberation_start,
            "end": self.now,
            "selected_target": tid,
            "selected_value": int(self.world.targets[tid].value),
            "ground_truth_best_value": int(best_value) if best_value is not None else int(self.world.targets[tid].value),
            "commit_time": col.commit_time,
            "decide_time": self.now if cause == "decide" else None,
            "cause": cause,
        }
        self._arrivals.append((arrival, cid, tid, draft))
        self._arrivals.sort(key=lambda item: (item[0], item[1]))

    def _resolve_arrivals(self) -> None:
        while self._arrivals and self._arrivals[0][0] <= self.now:
            arrival_t, cid, tid, draft = self._arrivals.pop(0)
            col = self.collectives[cid]
            outcome = self.world.claim(tid, cid, col.hub)
            new_hub = self.world.positions[tid] if outcome.established else col.hub
            record = DecisionRecord(
                collective_id=cid, index=col.decisions_made + 1,
                start=draft["start"], end=draft["end"],
                selected_target=tid, selected_value=draft["selected_value"],
                ground_truth_best_value=draft["ground_truth_best_value"],
                difficulty=self.difficulty.value,
                established=outcome.established, completed_at=arrival_t,
                commit_time=draft["commit_time"], decide_time=draft["decide_time"],
                cause=draft["cause"],
            )
            self.decisions.append(record)
            budget_left = col.decisions_made + 1 < self.config.decisions_per_collective
            col.finish_decision(arrival_t, new_hub, budget_left)
            self.station.on_decision_complete(cid)
            self.station.info(arrival_t, f"collective {col.label} decision {record.index} "
                                         f"{'established at' if outcome.established else 'returned from'} "
                                         f"target {tid}")
            self.emit(ev.HUB_MOVE, {
                "collective": cid, "target": tid,
                "established": outcome.established,
                "from": [outcome.previous_hub[0], outcome.previous_hub[1]],
                "to": [float(new_hub[0]), float(new_hub[1])],
                "decision": {
                    "collective_id": record.collective_id, "index": record.index,
                    "start": record.start, "end": record.end,
                    "selected_target": record.selected_target,
                    "selected_value": record.selected_value,
                    "ground_truth_best_value": record.ground_truth_best_value,
                    "difficulty": record.difficulty,
                    "established": record.established,
                    "completed_at": record.completed_at,
                    "commit_time": record.commit_time,
                    "decide_time": record.decide_time,
                    "cause": record.cause,
                },
            })
            if outcome.established:
                for other in self.collectives.values():
                    if other.id == cid:
                        continue
                    notes: list = []
                    other.on_target_occupied(tid, arrival_t, notes)
                    if notes:
                        self._emit_notes(other.id, notes)
            elapsed = arrival_t - self.start_time
            if trial_should_end(len(self.decisions), elapsed, self.config):
                self._end("decision_cap" if len(self.decisions) >= self.config.total_decision_cap
                          else "timeout_cap")
                return

    # ------------------------------ probes ------------------------------

    def _service_probes(self) -> None:
        while self._probe_answers_due and self._probe_answers_due[0][0] <= self.now:
            _, idx = self._probe_answers_due.pop(0)
            probe = self.probes[idx]
            if probe.status == "asked":
                self.answer_probe(idx, probe.ground_truth)

        for probe in self.probes:
            if probe.status == "asked" and self.now >= probe.ask_time + PROBE_INTERVAL_S:
                probe.status = "expired"
            if probe.status == "scheduled" and self.now >= probe.ask_time:
                self._ask_probe(probe)

    def _ask_probe(self, probe: SAProbe) -> None:
        view = self.build_view()
        candidates = [t for t in PROBE_TEMPLATES if t.level is probe.level]
        template = candidates[int(self.probe_rng.integers(0, len(candidates)))]
        subject = self._pick_subject(template.subject)
        if subject is None:
            probe.ask_time += PROBE_INTERVAL_S
            self.emit(ev.PROBE_ASKED, {"index": probe.index, "level": probe.level.value,
                                       "status": "voided",
                                       "rescheduled_at": probe.ask_time})
            return
        probe.template = template.name
        probe.subject = subject
        probe.ground_truth = ground_truth_answer(probe, view)
        probe.status = "asked"
        self.emit(ev.PROBE_ASKED, {
            "index": probe.index, "level": probe.level.value, "status": "asked",
            "template": probe.template, "subject": probe.subject,
            "ground_truth": probe.ground_truth, "ask_time": probe.ask_time,
        })
        if self.probe_responder == "oracle":
            latency = 2.0 + float(self.probe_rng.uniform(0.0, 4.0))
            bisect.insort(self._probe_answers_due, (self.now + latency, probe.index))

    def _pick_subject(self, subject_kind: str) -> dict | None:
        visible = [t.id for t in self.world.targets
                   if t.discovered and t.valued and not t.occupied]
        active = [c.id for c in self.collectives.values() if c.phase is not Phase.DECIDED]
        if subject_kind == "target":
            if not visible:
                return None
            return {"target": int(self.probe_rng.choice(visible))}
        if subject_kind == "collective":
            if not active:
                return None
            return {"collective": int(self.probe_rng.choice(active))}
        if subject_kind == "collective_target":
            if not visible or not active:
                return None
            return {"collective": int(self.probe_rng.choice(active)),
                    "target": int(self.probe_rng.choice(visible))}
        if subject_kind == "collective_pair":
            if len(visible) < 2 or not active:
                return None
            pair = self.probe_rng.choice(visible, size=2, replace=False)
            return {"collective": int(self.probe_rng.choice(active)),
                    "target": int(pair[0]), "target_b": int(pair[1])}
        raise ValueError(subject_kind)

    def answer_probe(self, index: int, answer) -> None:
        probe = self.probes[index]
        if probe.status != "asked":
            return
        probe.response = answer
        probe.response_time = self.now
        probe.status = "answered"
        self.emit(ev.PROBE_ANSWERED, {
            "index": index, "answer": answer, "correct": probe.correct,
            "response_time": self.now,
        })

    # ------------------------------ telemetry ------------------------------

    def _sample_support(self) -> None:
        m = np.stack([c.support_arr for c in self.collectives.values()])
        self._support_times.append(self.now)
        self._support_samples.append(m.copy())

    def support_trend(self, cid: int, tid: int, horizon: float = 30.0) -> float:
        if len(self._support_times) < 2:
            return 0.0
        t1 = self._support_times[-1]
        i = bisect.bisect_left(self._support_times, t1 - horizon)
        i = min(i, len(self._support_times) - 2)
        t0 = self._support_times[i]
        if t1 <= t0:
            return 0.0
        s1 = float(self._support_samples[-1][cid, tid])
        s0 = float(self._support_samples[i][cid, tid])
        return (s1 - s0) / (t1 - t0)

    def build_view(self) -> SimView:
        views = []
        trends: dict[tuple[int, int], float] = {}
        for c in self.collectives.values():
            support = c.support
            visible = [t for t in c.in_range_target_ids()
                       if self.world.targets[t].discovered]
            views.append(CollectiveView(
                id=c.id, label=c.label, phase=c.phase.value,
                phase_target=c.phase_target, support=support,
                abandoned=set(c.abandoned), in_range_visible=visible,
                live_population=c.live_population, state_counts=c.state_counts(),
            ))
            for tid in support:
                trends[(c.id, tid)] = self.support_trend(c.id, tid)
        return SimView(time=self.now, collectives=views, support_trend=trends)

    def ingest_ui_event(self, payload: dict) -> None:
        self.emit(ev.UI_EVENT, dict(payload))
        self._apply_ui_event(payload, self.now)

    def _apply_ui_event(self, payload: dict, now: float) -> None:
        kind = payload.get("ui")
        if kind == "click":
            self.interactions.append(InteractionEvent(
                timestamp=now, kind=InteractionKind(payload["click"]),
                subject_id=payload.get("subject"),
                screen_position=tuple(payload.get("pos", (0.0, 0.0))),
                click_id=payload.get("click_id")))
        elif kind == "window":
            key = (payload["window"], payload["subject"])
            if payload["action"] == "open":
                self._open_windows[key] = now
                self.interactions.append(InteractionEvent(
                    timestamp=now, kind=InteractionKind.WINDOW_OPEN,
                    subject_id=payload["subject"], window_kind=payload["window"]))
            else:
                opened = self._open_windows.pop(key, None)
                if opened is not None:
                    self.window_spans.append(WindowSpan(key[0], key[1], opened, now))
                self.interactions.append(InteractionEvent(
                    timestamp=now, kind=InteractionKind.WINDOW_CLOSE,
                    subject_id=payload["subject"], window_kind=payload["window"]))
        elif kind == "layout":
            if "mode" in payload:
                self.mode = VisualizationMode(payload["mode"])
            for k in self.layout_counts:
                if k in payload:
                    self.layout_counts[k] = int(payload[k])
            self._record_layout(now)
        elif kind == "mode":
            self.mode = VisualizationMode(payload["mode"])
            self._record_layout(now)

    def _record_layout(self, now: float | None = None) -> None:
        t = self.now if now is None else now
        pct = global_clutter(self.layout_counts["highlighted"],
                             self.layout_counts["plain"],
                             self.layout_counts["target_windows"],
                             self.layout_counts["collective_windows"],
                             self.mode)
        self.clutter_series.append((t, pct))

    # ------------------------------ wrap-up ------------------------------

    def _end(self, reason: str) -> None:
        self.end_reason = reason
        for (wkind, subject), opened in sorted(self._open_windows.items()):
            self.window_spans.append(WindowSpan(wkind, subject, opened, self.now))
        self._open_windows.clear()
        for probe in self.probes:
            if probe.status in ("asked",):
                probe.status = "expired"
        self.emit(ev.TRIAL_END, {
            "component": self.component_index, "reason": reason,
            "decisions": len(self.decisions),
        })

    def _finish(self) -> ComponentResult:
        interactions = classify_interactions(self.interactions, self.station.records)
        rollup = performance_rollup(self.decisions, self.probes, self.window_spans)
        return ComponentResult(
            difficulty=self.difficulty.value,
            component_index=self.component_index,
            start_time=self.start_time,
            end_time=self.now,
            end_reason=self.end_reason or "unknown",
            decisions=list(self.decisions),
            probes=list(self.probes),
            sa_scores=score_sa(self.probes),
            interactions=interactions,
            rollup=rollup,
            clutter_series=list(self.clutter_series),
            snapshots=list(self.snapshots),
        )


# ----------------------------------------------------------------------
# Snapshots
# ----------------------------------------------------------------------

def build_snapshot(sim: Simulation, include_entities: bool = False) -> dict:
    """Everything the console renders, versioned by the event-log seq.

    Ground-truth best labels and undiscovered targets never appear here.
    """
    targets = []
    for t in sim.world.targets:
        if not t.discovered or t.occupied:
            continue
        entry = {
            "id": t.id,
            "pos": list(meters_to_px(t.position)),
            "valued": t.valued,
            "value": t.value if t.valued else None,
            "evaluations": t.evaluations,
            "support": {str(c.id): c.support_count(t.id) for c in sim.collectives.values()
                        if c.support_count(t.id) > 0},
            "abandoned_by": sorted(c.id for c in sim.collectives.values()
                                   if t.id in c.abandoned),
            "in_range_of": sorted(c.id for c in sim.collectives.values()
                                  if t.id in c.in_range_target_ids()),
        }
        targets.append(entry)

    flights = {cid: (arrival_t, tid, draft)
               for (arrival_t, cid, tid, draft) in sim._arrivals}
    collectives = []
    for c in sim.collectives.values():
        entry = {
            "id": c.id, "label": c.label,
            "hub": list(meters_to_px(c.hub)),
            "phase": c.phase.value, "phase_target": c.phase_target,
            "state_counts": c.state_counts(),
            "live": c.live_population,
            "population": c.n,
            "decisions_made": c.decisions_made,
            "support": {str(k): v for k, v in sorted(c.support.items())},
            "decide_locked": c.decide_locked,
        }
        if c.id in flights:
            arrival_t, tid, draft = flights[c.id]
            entry["flight"] = {
                "target": tid,
                "to": list(meters_to_px(sim.world.positions[tid])),
                "started_at": draft["end"],
                "arrives_at": arrival_t,
            }
        if include_entities:
            px = c.pos * PX_PER_M
            entry["entities"] = [
                [int(s), float(px[i, 0]), float(px[i, 1])]
                for i, s in enumerate(c.state)
            ]
        collectives.append(entry)

    return {
        "seq": sim.log.last_seq,
        "t": round(sim.now, 6),
        "collectives": collectives,
        "targets": targets,
        "assignments": [
            {"id": a.id, "kind": a.command.kind.value,
             "collective": a.command.collective_id, "target": a.command.target_id,
             "status": a.status.value}
            for a in sim.station.visible_assignments()
        ],
        "messages": [
            {"t": m.timestamp, "severity": m.severity, "text": m.text,
             "cause": m.cause.value if m.cause else None}
            for m in sim.station.messages[-12:]
        ],
        "probes": [
            {"index": p.index, "level": p.level.value, "template": p.template,
             "subject": p.subject, "ask_time": p.ask_time}
            for p in sim.probes if p.status == "asked"
        ],
        "decisions": len(sim.decisions),
    }


# ----------------------------------------------------------------------
# Headless trials
# ----------------------------------------------------------------------

@dataclass
class TrialResult:
    scenario: dict
    model: str
    policy: str
    seed: int
    components: list[ComponentResult]
    log: ev.EventLog = field(repr=False, default=None)

    @property
    def decisions(self) -> list[DecisionRecord]:
        return [d for comp in self.components for d in comp.decisions]

    @property
    def probes(self) -> list[SAProbe]:
        return [p for comp in self.components for p in comp.probes]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "model": self.model,
            "policy": self.policy,
            "seed": self.seed,
            "components": [c.to_dict() for c in self.components],
            "overall": {
                "rollup": performance_rollup(self.decisions, self.probes),
                "sa_scores": score_sa(self.probes),
                "n_decisions": len(self.decisions),
            },
        }

    def save(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "events": out / "events.jsonl",
            "result": out / "result.json",
            "report": out / "report.txt",
        }
        self.log.dump(paths["events"])
        paths["result"].write_text(ev.dumps(self.to_dict()) + "\n")
        from .report import trial_report
        paths["report"].write_text(trial_report(self))
        return paths


def run_headless(scenario: Scenario, model: Model | None = None,
                 policy: OperatorPolicy | str | None = None,
                 seed: int | None = None,
                 probe_responder: str = "none",
                 script: list[dict] | None = None,
                 collect_snapshots: bool = False) -> TrialResult:
    """Run a full trial (every scenario component in order) without pacing."""
    model = model or scenario.model
    seed = scenario.seed if seed is None else seed
    if isinstance(policy, str) or policy is None:
        policy = make_policy(policy)

    log = ev.EventLog(meta={
        "scenario": scenario.to_dict(), "model": model.value,
        "policy": policy.name, "seed": seed,
    })
    components: list[ComponentResult] = []
    start = 0.0
    for idx, difficulty in enumerate(scenario.components):
        sim = Simulation(scenario, difficulty, model, seed, component_index=idx,
                         policy=policy, log=log, start_time=start,
                         probe_responder=probe_responder,
                         script=[s for s in (script or []) if s.get("component", 0) == idx],
                         collect_snapshots=collect_snapshots)
        components.append(sim.run())
        start = sim.now
    return TrialResult(scenario=scenario.to_dict(), model=model.value,
                       policy=policy.name, seed=seed, components=components, log=log)
