"""Objective telemetry: screen clutter, SA probes, interaction classification,
and per-trial performance rollups.

Everything here is a pure function over immutable snapshots and logs so the
same numbers come out live and on replay.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from enum import Enum


# ----------------------------------------------------------------------
# Global clutter
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ClutterConstants:
    """Pixel areas of interface objects on a 1920x1080 display."""

    screen_area: int = 2_073_600
    static_components: int = 493_414   # command panel, logs, map chrome
    hub_icons: int = 9_856             # the four collective icons
    highlighted_target: int = 2_350    # outlined, in range of the selection
    plain_target: int = 1_720
    entity_dots: int = 51_200          # 800 individual dots, IA mode only
    target_window: int = 32_922
    collective_window: int = 25_740
    px_per_meter: float = 1.97


DEFAULT_CLUTTER = ClutterConstants()


class VisualizationMode(Enum):
    IA = "ia"
    COLLECTIVE = "collective"


def global_clutter(highlighted_targets: int, plain_targets: int,
                   open_target_windows: int, open_collective_windows: int,
                   mode: VisualizationMode,
                   k: ClutterConstants = DEFAULT_CLUTTER) -> float:
    """Percent of screen area obstructed by interface objects.

    Additive in every count; the IA mode adds the fixed entity-dot area.
    """
    if min(highlighted_targets, plain_targets, open_target_windows,
           open_collective_windows) < 0:
        raise ValueError("counts must be non-negative")
    area = (k.static_components
            + k.hub_icons
            + highlighted_targets * k.highlighted_target
            + plain_targets * k.plain_target
            + (k.entity_dots if mode is VisualizationMode.IA else 0)
            + open_target_windows * k.target_window
            + open_collective_windows * k.collective_window)
    return area / k.screen_area * 100.0


# ----------------------------------------------------------------------
# SA probes
# ----------------------------------------------------------------------

PROBE_FIRST_ASK_S = 50.0
PROBE_INTERVAL_S = 60.0
PROBES_PER_COMPONENT = 6


def schedule_probes(component_start: float) -> list[float]:
    """Ask times: 50 s into the component, then one-minute increments."""
    return [component_start + PROBE_FIRST_ASK_S + PROBE_INTERVAL_S * k
            for k in range(PROBES_PER_COMPONENT)]


class SALevel(Enum):
    SA1 = "sa1"   # perception
    SA2 = "sa2"   # comprehension
    SA3 = "sa3"   # projection


@dataclass(frozen=True)
class ProbeTemplate:
    name: str
    level: SALevel
    subject: str  # "target" | "collective" | "collective_target" | "collective_pair"
    text: str


# Twelve templates; a full two-component trial asks 5 SA1, 4 SA2 and 3 SA3.
PROBE_TEMPLATES: tuple[ProbeTemplate, ...] = (
    ProbeTemplate("investigating_collectives", SALevel.SA1, "target",
                  "Which collectives are investigating target {target}?"),
    ProbeTemplate("targets_in_range_count", SALevel.SA1, "collective",
                  "How many visible targets are in range of collective {collective}?"),
    ProbeTemplate("largest_state_group", SALevel.SA1, "collective",
                  "Which state holds the most entities of collective {collective}?"),
    ProbeTemplate("target_is_abandoned", SALevel.SA1, "collective_target",
                  "Has collective {collective} abandoned target {target}?"),
    ProbeTemplate("top_supported_target", SALevel.SA1, "collective",
                  "Which target does collective {collective} support the most?"),
    ProbeTemplate("majority_support_collective", SALevel.SA2, "target",
                  "Which collective holds majority support for target {target}?"),
    ProbeTemplate("has_committed", SALevel.SA2, "collective",
                  "Is collective {collective} committed to a target?"),
    ProbeTemplate("uncommitted_band", SALevel.SA2, "collective",
                  "Roughly what share of collective {collective} is uncommitted?"),
    ProbeTemplate("higher_support_target", SALevel.SA2, "collective_pair",
                  "Which of targets {target} and {target_b} has more support from collective {collective}?"),
    ProbeTemplate("support_will_decrease", SALevel.SA3, "collective_target",
                  "Will support of collective {collective} for target {target} decrease?"),
    ProbeTemplate("will_commit_soon", SALevel.SA3, "collective",
                  "Will collective {collective} reach a committed target within a minute?"),
    ProbeTemplate("likely_selection", SALevel.SA3, "collective",
                  "Which target will collective {collective} most likely select?"),
)

TEMPLATES_BY_NAME = {t.name: t for t in PROBE_TEMPLATES}

# Per-component level sequences; two components together give the 5/4/3 mix.
COMPONENT_LEVEL_MIX = (
    (SALevel.SA1, SALevel.SA1, SALevel.SA2, SALevel.SA1, SALevel.SA2, SALevel.SA3),
    (SALevel.SA2, SALevel.SA1, SALevel.SA2, SALevel.SA1, SALevel.SA3, SALevel.SA3),
)


@dataclass
class SAProbe:
    index: int
    ask_time: float
    level: SALevel
    template: str
    subject: dict
    ground_truth: object = None
    response: object = None
    response_time: float | None = None
    status: str = "scheduled"  # scheduled | asked | answered | expired | voided

    @property
    def correct(self) -> bool:
        return self.status == "answered" and normalize_answer(self.response) == normalize_answer(self.ground_truth)


def normalize_answer(value) -> object:
    if isinstance(value, (list, tuple, set)):
        return tuple(sorted(str(v) for v in value))
    if isinstance(value, bool):
        return value
    if value is None:
        return None
    return str(value)


# A minimal state view the answer engine works against. The live engine and
# replay both construct it, and tests can fabricate it directly.

@dataclass
class CollectiveView:
    id: int
    label: str
    phase: str
    phase_target: int | None
    support: dict[int, int]
    abandoned: set[int]
    in_range_visible: list[int]
    live_population: int
    state_counts: dict[str, int]


@dataclass
class SimView:
    time: float
    collectives: list[CollectiveView]
    support_trend: dict[tuple[int, int], float] = field(default_factory=dict)

    def collective(self, cid: int) -> CollectiveView:
        for c in self.collectives:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def trend(self, cid: int, tid: int) -> float:
        return self.support_trend.get((cid, tid), 0.0)


def ground_truth_answer(probe: SAProbe, view: SimView):
    """Scripted answer for a probe from the current state snapshot."""
    name = probe.template
    subject = probe.subject
    tid = subject.get("target")
    cid = subject.get("collective")

    if name == "investigating_collectives":
        return sorted(c.label for c in view.collectives if c.support.get(tid, 0) > 0)
    if name == "targets_in_range_count":
        return len(view.collective(cid).in_range_visible)
    if name == "largest_state_group":
        counts = view.collective(cid).state_counts
        order = ("uncommitted", "favoring", "committed", "executing")
        return max(order, key=lambda s: (counts.get(s, 0), -order.index(s)))
    if name == "target_is_abandoned":
        return tid in view.collective(cid).abandoned
    if name == "top_supported_target":
        support = view.collective(cid).support
        if not support:
            return None
        best = max(support.items(), key=lambda kv: (kv[1], -kv[0]))
        return best[0]
    if name == "majority_support_collective":
        holders = []
        for c in view.collectives:
            total = sum(c.support.values())
            if total > 0 and c.support.get(tid, 0) > 0.5 * total:
                holders.append(c.label)
        return sorted(holders)
    if name == "has_committed":
        return view.collective(cid).phase in ("committed", "executing")
    if name == "uncommitted_band":
        c = view.collective(cid)
        frac = c.state_counts.get("uncommitted", 0) / max(1, c.live_population)
        if frac < 0.25:
            return "low"
        if frac < 0.60:
            return "medium"
        return "high"
    if name == "higher_support_target":
        c = view.collective(cid)
        tb = subject.get("target_b")
        sa, sb = c.support.get(tid, 0), c.support.get(tb, 0)
        return tid if sa >= sb else tb
    if name == "support_will_decrease":
        c = view.collective(cid)
        if tid in c.abandoned:
            return True
        s = c.support.get(tid, 0)
        dominated = any(v > s for t, v in c.support.items() if t != tid)
        return bool(dominated and view.trend(cid, tid) < 0)
    if name == "will_commit_soon":
        c = view.collective(cid)
        if c.phase in ("committed", "executing"):
            return True
        if not c.support:
            return False
        top_t, top_s = max(c.support.items(), key=lambda kv: (kv[1], -kv[0]))
        projected = top_s + view.trend(cid, top_t) * 60.0
        return bool(projected >= 0.30 * c.live_population)
    if name == "likely_selection":
        support = view.collective(cid).support
        if not support:
            return None
        return max(support.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    raise ValueError(f"unknown probe template {name}")


def score_sa(probes: list[SAProbe]) -> dict[str, float | None]:
    """Percent correct overall and per level; anything unanswered is wrong."""
    def pct(subset: list[SAProbe]) -> float | None:
        if not subset:
            return None
        return 100.0 * sum(1 for p in subset if p.correct) / len(subset)

    return {
        "sa_o": pct(list(probes)),
        "sa1": pct([p for p in probes if p.level is SALevel.SA1]),
        "sa2": pct([p for p in probes if p.level is SALevel.SA2]),
        "sa3": pct([p for p in probes if p.level is SALevel.SA3]),
    }


# ----------------------------------------------------------------------
# Interaction telemetry
# ----------------------------------------------------------------------

class InteractionKind(Enum):
    COLLECTIVE_LEFT_CLICK = "collective_left_click"
    COLLECTIVE_RIGHT_CLICK = "collective_right_click"
    TARGET_LEFT_CLICK = "target_left_click"
    TARGET_RIGHT_CLICK = "target_right_click"
    WINDOW_OPEN = "window_open"
    WINDOW_CLOSE = "window_close"
    COMMAND_ISSUED = "command_issued"


@dataclass
class InteractionEvent:
    timestamp: float
    kind: InteractionKind
    subject_id: int | None = None
    screen_position: tuple[float, float] | None = None
    click_id: int | None = None
    window_kind: str | None = None  # "target" | "collective"


INTERVENTION_SUPPORT_FRAC = 0.10


def classify_interactions(events: list[InteractionEvent], commands) -> dict:
    """Observation/intervention counts from the click stream and command log.

    A left-click is an observation unless an accepted command consumed it
    (the console reports consumed click ids with each commit). An accepted
    abandon on a target holding strictly more than 10% of the collective's
    support counts as an intervention.
    """
    times = [e.timestamp for e in events]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("interaction log must be time-ordered")

    consumed: set[int] = set()
    for rec in commands:
        if rec.accepted:
            consumed.update(rec.consumed_clicks)

    target_left = [e for e in events if e.kind is InteractionKind.TARGET_LEFT_CLICK]
    coll_left = [e for e in events if e.kind is InteractionKind.COLLECTIVE_LEFT_CLICK]
    target_right = sum(1 for e in events if e.kind is InteractionKind.TARGET_RIGHT_CLICK)
    coll_right = sum(1 for e in events if e.kind is InteractionKind.COLLECTIVE_RIGHT_CLICK)

    target_obs = sum(1 for e in target_left if e.click_id not in consumed)
    coll_obs = sum(1 for e in coll_left if e.click_id not in consumed)

    accepted_abandons = [r for r in commands if r.accepted and r.kind.value == "abandon"]
    interventions = sum(1 for r in accepted_abandons
                        if r.support_frac_at_issue > INTERVENTION_SUPPORT_FRAC)
    new_abandons = [r for r in accepted_abandons if r.was_new_abandon]
    highest_value_abandoned_pct = (
        100.0 * sum(1 for r in new_abandons if r.was_highest_value) / len(new_abandons)
        if new_abandons else 0.0)
    distinct = {(r.collective_id, r.target_id, r.decision_index) for r in new_abandons}
    abandon_exceeded_pct = (
        100.0 * (len(accepted_abandons) - len(distinct)) / len(accepted_abandons)
        if accepted_abandons else 0.0)

    return {
        "collective_left_clicks": len(coll_left),
        "collective_right_clicks": coll_right,
        "target_left_clicks": len(target_left),
        "target_right_clicks": target_right,
        "collective_observations": coll_obs,
        "target_observations": target_obs,
        "interventions": interventions,
        "abandon_commands": len(accepted_abandons),
        "highest_value_abandoned_pct": highest_value_abandoned_pct,
        "abandon_exceeded_pct": abandon_exceeded_pct,
    }


def probe_click_distance(subject_px: tuple[float, float],
                         click_px: tuple[float, float]) -> float:
    return math.hypot(subject_px[0] - click_px[0], subject_px[1] - click_px[1])


PROBE_BEFORE_WINDOW_S = 15.0
PROBE_ASK_WINDOW_S = 10.0


def bucket_probe_times(probe: SAProbe, timestamps: list[float],
                       expiry: float | None = None) -> dict[str, list[float]]:
    """Split timestamps into before / while-asked / during-response buckets."""
    ask = probe.ask_time
    resp = probe.response_time
    if resp is None:
        resp = expiry if expiry is not None else ask + PROBE_INTERVAL_S
    ask_end = min(resp, ask + PROBE_ASK_WINDOW_S)
    out = {"before": [], "asking": [], "responding": []}
    for ts in timestamps:
        if ask - PROBE_BEFORE_WINDOW_S <= ts < ask:
            out["before"].append(ts)
        elif ask <= ts < ask_end:
            out["asking"].append(ts)
        elif ask_end <= ts <= resp:
            out["responding"].append(ts)
    return out


# ----------------------------------------------------------------------
# Decisions and rollup
# ----------------------------------------------------------------------

@dataclass
class DecisionRecord:
    collective_id: int
    index: int                    # 1 or 2 within the component
    start: float
    end: float                    # moment the executing transition happened
    selected_target: int
    selected_value: int
    ground_truth_best_value: int
    difficulty: str
    established: bool
    completed_at: float
    commit_time: float | None = None
    decide_time: float | None = None
    cause: str = "quorum"         # "quorum" | "decide"

    @property
    def duration_minutes(self) -> float:
        return (self.end - self.start) / 60.0

    @property
    def success(self) -> bool:
        """The collective occupied the ground-truth highest-valued target."""
        return self.established and self.selected_value == self.ground_truth_best_value

    @property
    def commit_to_decide_minutes(self) -> float | None:
        if self.commit_time is None or self.decide_time is None:
            return None
        return (self.decide_time - self.commit_time) / 60.0


@dataclass
class WindowSpan:
    window_kind: str              # "target" | "collective"
    subject_id: int
    opened_at: float
    closed_at: float


def _overlap(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def performance_rollup(decisions: list[DecisionRecord],
                       probes: list[SAProbe],
                       windows: list[WindowSpan] | None = None) -> dict:
    """Trial-level performance numbers in the units the tables use."""
    windows = windows or []
    out: dict = {"n_decisions": len(decisions)}
    if decisions:
        durations = [d.duration_minutes for d in decisions]
        out["decision_time_mean_min"] = statistics.fmean(durations)
        out["decision_time_sd_min"] = statistics.pstdev(durations) if len(durations) > 1 else 0.0
        out["selection_success_pct"] = 100.0 * sum(1 for d in decisions if d.success) / len(decisions)
        out["mean_selected_value"] = statistics.fmean(d.selected_value for d in decisions)
        latencies = [d.commit_to_decide_minutes for d in decisions
                     if d.commit_to_decide_minutes is not None]
        out["commit_to_decide_mean_min"] = statistics.fmean(latencies) if latencies else None
    else:
        out.update(decision_time_mean_min=None, decision_time_sd_min=None,
                   selection_success_pct=None, mean_selected_value=None,
                   commit_to_decide_mean_min=None)

    out["sa"] = score_sa(probes)

    target_windows = [w for w in windows if w.window_kind == "target"]
    open_fracs: list[float] = []
    opens_per_decision: list[int] = []
    for d in decisions:
        span = max(1e-9, d.completed_at - d.start)
        per_target: dict[int, float] = {}
        n_opens = 0
        for w in target_windows:
            ov = _overlap(d.start, d.completed_at, w.opened_at, w.closed_at)
            if ov > 0:
                per_target[w.subject_id] = per_target.get(w.subject_id, 0.0) + ov
            if d.start <= w.opened_at <= d.completed_at:
                n_opens += 1
        open_fracs.extend(100.0 * v / span for v in per_target.values())
        opens_per_decision.append(n_opens)
    out["target_window_open_pct_mean"] = statistics.fmean(open_fracs) if open_fracs else 0.0
    out["target_window_opens_per_decision"] = (
        statistics.fmean(opens_per_decision) if opens_per_decision else 0.0)
    return out


def stats_row(values: list[float]) -> dict[str, float | None]:
    if not values:
        return {"mean": None, "sd": None, "median": None, "min": None, "max": None}
    return {
        "mean": statistics.fmean(values),
        "sd": statistics.pstdev(values) if len(values) > 1 else 0.0,
        "median": statistics.median(values),
        "min": min(values),
        "max": max(values),
    }


def format_stats_table(title: str, rows: dict[str, list[float]]) -> str:
    """Fixed-width table with mean/SD/median/min/max per labelled row."""
    lines = [title, "-" * len(title)]
    header = f"{'group':<24}{'mean':>10}{'SD':>10}{'median':>10}{'min':>10}{'max':>10}"
    lines.append(header)
    for label, values in rows.items():
        s = stats_row(values)
        cells = "".join(
            f"{(f'{s[k]:.2f}' if s[k] is not None else '-'):>10}"
            for k in ("mean", "sd", "median", "min", "max"))
        lines.append(f"{label:<24}{cells}")
    return "\n".join(lines)
