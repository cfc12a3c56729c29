"""Operator command validation and lifecycle.

Commands influence one collective at a time and are only meaningful inside
the hub. Validation is pure: a rejected command never mutates state and
yields exactly one Illegal system message.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .collective import Collective, Phase
from .world import World, in_range


class CommandKind(Enum):
    INVESTIGATE = "investigate"
    ABANDON = "abandon"
    DECIDE = "decide"
    CANCEL_ABANDON = "cancel_abandon"


class Cause(Enum):
    OUT_OF_RANGE = "out_of_range"
    UNVALUED_TARGET = "unvalued_target"
    INSUFFICIENT_SUPPORT = "insufficient_support"
    DECIDE_LOCKED = "decide_locked"
    OTHER = "other"


class AssignmentStatus(Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    CANCELLED = "cancelled"


@dataclass
class OperatorCommand:
    kind: CommandKind
    collective_id: int
    target_id: int | None = None
    assignment_ref: int | None = None
    issued_at: float = 0.0
    # Console selection bookkeeping so click-consumption can be classified.
    consumed_clicks: tuple[int, ...] = ()


@dataclass
class Assignment:
    id: int
    command: OperatorCommand
    status: AssignmentStatus = AssignmentStatus.ACTIVE


@dataclass
class SystemMessage:
    timestamp: float
    severity: str  # "info" | "illegal"
    text: str
    cause: Cause | None = None


@dataclass
class Verdict:
    accepted: bool
    cause: Cause | None = None
    reason: str = ""

    @classmethod
    def ok(cls) -> "Verdict":
        return cls(True)

    @classmethod
    def illegal(cls, cause: Cause, reason: str) -> "Verdict":
        return cls(False, cause, reason)


def validate_command(cmd: OperatorCommand, world: World,
                     collectives: dict[int, Collective],
                     assignments: dict[int, Assignment]) -> Verdict:
    """Check legality against current state without mutating anything."""
    col = collectives.get(cmd.collective_id)
    if col is None:
        return Verdict.illegal(Cause.OTHER, f"unknown collective {cmd.collective_id}")
    if col.decide_locked or col.phase is Phase.DECIDED:
        return Verdict.illegal(Cause.DECIDE_LOCKED,
                               f"collective {col.label} no longer accepts commands")

    if cmd.kind is CommandKind.CANCEL_ABANDON:
        ref = assignments.get(cmd.assignment_ref)
        if ref is None:
            return Verdict.illegal(Cause.OTHER, f"assignment {cmd.assignment_ref} not found")
        if ref.command.kind is not CommandKind.ABANDON:
            return Verdict.illegal(Cause.OTHER, "only abandon commands can be cancelled")
        if ref.status is not AssignmentStatus.ACTIVE:
            return Verdict.illegal(Cause.OTHER, "assignment is not active")
        return Verdict.ok()

    if cmd.target_id is None or not (0 <= cmd.target_id < len(world.targets)):
        return Verdict.illegal(Cause.OTHER, f"unknown target {cmd.target_id}")
    target = world.targets[cmd.target_id]

    if cmd.kind is CommandKind.INVESTIGATE:
        if target.occupied:
            return Verdict.illegal(Cause.OTHER, f"target {target.id} is occupied")
        if not in_range(col.hub, target.position, world.config.range_m):
            return Verdict.illegal(Cause.OUT_OF_RANGE,
                                   f"target {target.id} outside collective {col.label} search region")
        if not target.valued:
            return Verdict.illegal(Cause.UNVALUED_TARGET,
                                   f"target {target.id} has no assigned value yet")
        if target.id in col.abandoned:
            return Verdict.illegal(Cause.OTHER, f"target {target.id} is abandoned")
        return Verdict.ok()

    if cmd.kind is CommandKind.ABANDON:
        if not target.valued:
            return Verdict.illegal(Cause.UNVALUED_TARGET,
                                   f"target {target.id} has no assigned value yet")
        return Verdict.ok()

    if cmd.kind is CommandKind.DECIDE:
        threshold = col.params.quorum_commit * col.live_population - 1e-9
        if col.support_count(target.id) < threshold:
            return Verdict.illegal(
                Cause.INSUFFICIENT_SUPPORT,
                f"support for target {target.id} below {col.params.quorum_commit:.0%}")
        return Verdict.ok()

    return Verdict.illegal(Cause.OTHER, f"unknown command kind {cmd.kind}")


@dataclass
class CommandRecord:
    """Everything the telemetry pipeline needs about one processed command."""

    t: float
    kind: CommandKind
    collective_id: int
    target_id: int | None
    accepted: bool
    cause: Cause | None
    assignment_id: int | None
    support_at_issue: int = 0
    support_frac_at_issue: float = 0.0
    was_new_abandon: bool = False
    was_highest_value: bool = False
    decision_index: int = 0
    consumed_clicks: tuple[int, ...] = ()


class CommandStation:
    """Serial command processor: assignments log plus system messages."""

    def __init__(self, world: World, collectives: dict[int, Collective]):
        self.world = world
        self.collectives = collectives
        self.assignments: dict[int, Assignment] = {}
        self.archived: list[Assignment] = []
        self.messages: list[SystemMessage] = []
        self.records: list[CommandRecord] = []
        self._next_id = 1

    def info(self, t: float, text: str) -> SystemMessage:
        msg = SystemMessage(t, "info", text)
        self.messages.append(msg)
        return msg

    def process(self, cmd: OperatorCommand, now: float) -> tuple[Verdict, CommandRecord, list]:
        """Validate then apply; returns the verdict, record, and state notes."""
        cmd.issued_at = now
        verdict = validate_command(cmd, self.world, self.collectives, self.assignments)
        notes: list = []
        col = self.collectives.get(cmd.collective_id)

        support_at_issue = 0
        frac = 0.0
        if col is not None and cmd.target_id is not None and 0 <= cmd.target_id < len(self.world.targets):
            support_at_issue = col.support_count(cmd.target_id)
            live = max(1, col.live_population)
            frac = support_at_issue / live

        record = CommandRecord(
            t=now, kind=cmd.kind, collective_id=cmd.collective_id,
            target_id=cmd.target_id, accepted=verdict.accepted, cause=verdict.cause,
            assignment_id=None, support_at_issue=support_at_issue,
            support_frac_at_issue=frac,
            decision_index=(col.decisions_made + 1) if col is not None else 0,
            consumed_clicks=cmd.consumed_clicks,
        )

        if not verdict.accepted:
            self.messages.append(SystemMessage(now, "illegal", verdict.reason, verdict.cause))
            self.records.append(record)
            return verdict, record, notes

        assignment = Assignment(self._next_id, cmd)
        self._next_id += 1
        self.assignments[assignment.id] = assignment
        record.assignment_id = assignment.id

        if cmd.kind is CommandKind.INVESTIGATE:
            change = col.apply_investigate(cmd.target_id, now)
            if change is not None:
                notes.append(change)
            assignment.status = AssignmentStatus.COMPLETED
        elif cmd.kind is CommandKind.ABANDON:
            record.was_new_abandon = cmd.target_id not in col.abandoned
            best_id, _ = self.world.ground_truth_best(col.hub)
            record.was_highest_value = record.was_new_abandon and best_id == cmd.target_id
            change, phase_note = col.apply_abandon(cmd.target_id, now)
            if change is not None:
                notes.append(change)
            if phase_note is not None:
                notes.append(phase_note)
        elif cmd.kind is CommandKind.DECIDE:
            notes.extend(col.begin_executing(cmd.target_id, now, "decide"))
        elif cmd.kind is CommandKind.CANCEL_ABANDON:
            ref = self.assignments[cmd.assignment_ref]
            ref.status = AssignmentStatus.CANCELLED
            col.cancel_abandon(ref.command.target_id)
            assignment.status = AssignmentStatus.COMPLETED

        self.records.append(record)
        return verdict, record, notes

    def on_decision_complete(self, collective_id: int) -> None:
        """A decision wipes the collective's assignments from the log."""
        drop = [aid for aid, a in self.assignments.items()
                if a.command.collective_id == collective_id]
        for aid in drop:
            a = self.assignments.pop(aid)
            if a.command.kind is CommandKind.DECIDE and a.status is AssignmentStatus.ACTIVE:
                a.status = AssignmentStatus.COMPLETED
            self.archived.append(a)

    def visible_assignments(self) -> list[Assignment]:
        return list(self.assignments.values())
