"""Entity state machine and hub-mediated best-of-n dynamics.

Three behavior models share this machinery:

* M1 scores targets by value alone; recruitment runs freely, so nearer
  targets enjoy a visit-rate advantage.
* M2 adds bias reduction: advocates returning from a nearby target sit out a
  distance-dependent delay before recruiting, interaction frequency is
  boosted, and pending hub timers are cleared on phase transitions
  (episodic queuing).
* M3 keeps exploration and assessment but performs no autonomous
  recruitment; consensus is built through operator commands and only an
  operator decide can start execution.

State is held in flat numpy arrays (one collective = up to a few hundred
entities stepped at 10 Hz), with per-entity views exposed for tests and
snapshots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .world import (MAP_H_M, MAP_MARGIN_M, MAP_W_M, SEARCH_RANGE_M, World,
                    distance)

QUORUM_EPS = 1e-9


class Model(Enum):
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"


class EntityState(IntEnum):
    UNCOMMITTED = 0
    FAVORING = 1
    COMMITTED = 2
    EXECUTING = 3


class Errand(IntEnum):
    IN_HUB = 0
    TO_TARGET = 1
    ASSESSING = 2
    RETURNING = 3
    LOST = 4


class Phase(Enum):
    DELIBERATING = "deliberating"
    COMMITTED = "committed"
    EXECUTING = "executing"
    DECIDED = "decided"


ADVOCATE_STATES = (EntityState.FAVORING, EntityState.COMMITTED)


@dataclass
class ModelParams:
    """Behavior parameters; defaults are tuned per model via `for_model`."""

    recruit_gain: float = 0.03
    reassess_period: float = 30.0
    interaction_delay_coeff: float = 0.0
    interaction_frequency_mult: float = 1.0
    episodic_queuing: bool = False
    entity_speed: float = 10.0
    quorum_commit: float = 0.30
    quorum_execute: float = 0.50
    # Stand-in micro-dynamics knobs (the underlying entity model leaves these
    # open): spontaneous quality-weighted resignation keeps split support from
    # deadlocking, encounter_favor_prob throttles spontaneous advocacy.
    abandon_gain: float = 0.06
    encounter_favor_prob: float = 0.3
    discovery_radius: float = 30.0
    assess_duration: float = 2.0
    hub_dwell_min: float = 6.0
    hub_dwell_max: float = 18.0
    waypoint_continue_prob: float = 0.35
    p_lost: float = 0.02
    value_noise_sigma: float = 0.0
    delay_range: float = SEARCH_RANGE_M

    def __post_init__(self) -> None:
        for name in ("recruit_gain", "reassess_period", "entity_speed",
                     "quorum_commit", "quorum_execute", "discovery_radius",
                     "assess_duration", "hub_dwell_min", "hub_dwell_max",
                     "delay_range"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.interaction_delay_coeff < 0 or self.abandon_gain < 0:
            raise ValueError("rates must be non-negative")
        if self.interaction_frequency_mult < 1.0:
            raise ValueError("interaction_frequency_mult must be >= 1")
        if not self.quorum_commit < self.quorum_execute <= 1.0:
            raise ValueError("require quorum_commit < quorum_execute <= 1")
        if not 0.0 <= self.p_lost <= 1.0:
            raise ValueError("p_lost must be a probability")

    @classmethod
    def for_model(cls, model: Model, **overrides) -> "ModelParams":
        base: dict = {}
        if model is Model.M2:
            # kappa = 2 / speed makes delay + round-trip distance-neutral.
            base.update(interaction_delay_coeff=0.2,
                        interaction_frequency_mult=4.0,
                        episodic_queuing=True)
        base.update(overrides)
        return cls(**base)


@dataclass
class Entity:
    """Read-only view of one collective member."""

    id: int
    state: EntityState
    target_id: int | None
    errand: Errand
    position: tuple[float, float]
    dwell_until: float
    last_assessed_quality: float | None


@dataclass
class StateChange:
    entities: list[int]
    to_state: EntityState | None   # None marks entities lost in place
    target_id: int | None
    reason: str


@dataclass
class AssessmentNote:
    entity: int
    target_id: int
    quality: float
    first_discovery: bool
    evaluations: int


@dataclass
class PhaseNote:
    phase: Phase
    target_id: int | None
    cause: str


def interaction_delay(dist: float, params: ModelParams, model: Model = Model.M2) -> float:
    """Post-assessment hold-off that evens out visit rates across distances.

    Linear in (delay_range - distance): advocates of nearby targets wait
    longest. Zero for M1/M3.
    """
    if dist < 0:
        raise ValueError("distance must be non-negative")
    if model is not Model.M2:
        return 0.0
    return params.interaction_delay_coeff * max(0.0, params.delay_range - dist)


def assess_target(target, hub_position, params: ModelParams, rng,
                  model: Model = Model.M1) -> float:
    """Quality score for a target: value mapped onto [0, 1].

    Distance never enters the score directly; distance bias shows up through
    travel time (M1/M3) and is counteracted by the M2 interaction delay,
    which the caller applies to the assessing entity's dwell timer.
    """
    d = distance(target.position, hub_position)
    if d > SEARCH_RANGE_M:
        raise ValueError(f"target {target.id} out of range ({d:.1f} m)")
    q = target.value / 100.0
    if params.value_noise_sigma > 0:
        q += float(rng.normal(0.0, params.value_noise_sigma))
    return min(1.0, max(0.0, q))


def recruit_probability(params: ModelParams, quality: float) -> float:
    return min(1.0, params.recruit_gain * params.interaction_frequency_mult * quality)


def recruit(advocate: Entity, listener: Entity, quality: float,
            params: ModelParams, rng) -> StateChange | None:
    """One hub contact: the advocate tries to win over an uncommitted listener.

    Callers filter on dwell; unmet preconditions are a no-op, not an error.
    """
    if advocate.errand is not Errand.IN_HUB or listener.errand is not Errand.IN_HUB:
        return None
    if advocate.state not in ADVOCATE_STATES or listener.state is not EntityState.UNCOMMITTED:
        return None
    p = recruit_probability(params, quality)
    if p >= 1.0 or (p > 0.0 and rng.random() < p):
        return StateChange([listener.id], EntityState.FAVORING, advocate.target_id, "recruit")
    return None


def commit_via_contact(committed: Entity, other: Entity) -> StateChange | None:
    """Contact with a committed entity hardens support for the same target."""
    if committed.errand is not Errand.IN_HUB or other.errand is not Errand.IN_HUB:
        return None
    if committed.state is not EntityState.COMMITTED:
        return None
    if other.state is EntityState.UNCOMMITTED:
        return StateChange([other.id], EntityState.COMMITTED, committed.target_id, "contact")
    if other.state is EntityState.FAVORING and other.target_id == committed.target_id:
        return StateChange([other.id], EntityState.COMMITTED, committed.target_id, "contact")
    return None


class Collective:
    """One hub population; a pure state machine stepped by the engine thread."""

    def __init__(self, cid: int, label: str, hub_position, population: int,
                 model: Model, params: ModelParams, rng: np.random.Generator,
                 world: World):
        self.id = cid
        self.label = label
        self.model = model
        self.params = params
        self.rng = rng
        self.world = world
        self.n = population
        self.hub = np.array(hub_position, dtype=float)

        n = population
        self.pos = np.tile(self.hub, (n, 1)) + rng.uniform(-5.0, 5.0, size=(n, 2))
        self.dest = self.pos.copy()
        self.state = np.full(n, EntityState.UNCOMMITTED, dtype=np.int8)
        self.target = np.full(n, -1, dtype=np.int32)
        self.errand = np.full(n, Errand.IN_HUB, dtype=np.int8)
        self.lost = np.zeros(n, dtype=bool)
        self.dwell_until = np.zeros(n, dtype=float)
        self.timer = rng.uniform(0.0, params.hub_dwell_max, size=n)
        self.pending_delay = np.zeros(n, dtype=float)
        self.quality = np.full(n, np.nan, dtype=float)

        self.support_arr = np.zeros(len(world.targets), dtype=np.int32)
        self.abandoned: set[int] = set()
        self.phase = Phase.DELIBERATING
        self.phase_target: int | None = None
        self.decide_locked = False
        self.decisions_made = 0
        self.commit_time: float | None = None
        self.deliberation_start = 0.0
        self._refresh_candidates()

    # ------------------------------------------------------------------
    # views & bookkeeping
    # ------------------------------------------------------------------

    def entity(self, i: int) -> Entity:
        q = self.quality[i]
        tid = int(self.target[i])
        return Entity(
            id=i,
            state=EntityState(int(self.state[i])),
            target_id=tid if tid >= 0 else None,
            errand=Errand(int(self.errand[i])),
            position=(float(self.pos[i, 0]), float(self.pos[i, 1])),
            dwell_until=float(self.dwell_until[i]),
            last_assessed_quality=None if math.isnan(q) else float(q),
        )

    @property
    def support(self) -> dict[int, int]:
        ids = np.flatnonzero(self.support_arr)
        return {int(t): int(self.support_arr[t]) for t in ids}

    def support_count(self, tid: int) -> int:
        return int(self.support_arr[tid])

    def recompute_support(self) -> dict[int, int]:
        """Recount advocacy from entity states (oracle for the ledger)."""
        out: dict[int, int] = {}
        mask = ((self.state == EntityState.FAVORING) | (self.state == EntityState.COMMITTED)) & ~self.lost
        for tid in self.target[mask]:
            out[int(tid)] = out.get(int(tid), 0) + 1
        return out

    def state_counts(self) -> dict[str, int]:
        return {
            "uncommitted": int((self.state == EntityState.UNCOMMITTED).sum()),
            "favoring": int((self.state == EntityState.FAVORING).sum()),
            "committed": int((self.state == EntityState.COMMITTED).sum()),
            "executing": int((self.state == EntityState.EXECUTING).sum()),
        }

    @property
    def live_population(self) -> int:
        return self.n - int(self.lost.sum())

    def _commit_threshold(self) -> float:
        return self.params.quorum_commit * self.live_population - QUORUM_EPS

    def _execute_threshold(self) -> float:
        return self.params.quorum_execute * self.live_population - QUORUM_EPS

    def _refresh_candidates(self) -> None:
        mask = self.world.in_range_mask(self.hub) & ~self.world.occupied
        self._cand_ids = np.flatnonzero(mask).astype(np.int32)
        self._cand_pos = self.world.positions[self._cand_ids]

    def in_range_target_ids(self) -> list[int]:
        return [int(t) for t in self._cand_ids]

    # ------------------------------------------------------------------
    # stepping
    # ------------------------------------------------------------------

    def step(self, now: float, dt: float, notes: list) -> None:
        """Advance every entity by dt, appending transition notes."""
        if self.phase is Phase.DECIDED:
            return
        active = ~self.lost

        moving = active & ((self.errand == Errand.TO_TARGET) | (self.errand == Errand.RETURNING))
        if moving.any():
            self._move(moving, now, dt, notes)

        assessing = active & (self.errand == Errand.ASSESSING) & (self.timer <= now)
        if assessing.any():
            self._finish_assessments(np.flatnonzero(assessing), now, notes)

        if self.phase is not Phase.EXECUTING:
            self._scan_discoveries(now)
            self._hub_interactions(now, dt, notes)
            self._hub_departures(now)
            self.detect_quorum(now, notes)

    def _move(self, moving: np.ndarray, now: float, dt: float, notes: list) -> None:
        idx = np.flatnonzero(moving)
        delta = self.dest[idx] - self.pos[idx]
        dist = np.hypot(delta[:, 0], delta[:, 1])
        step = self.params.entity_speed * dt
        arrived = dist <= step
        go = ~arrived
        if go.any():
            g = idx[go]
            self.pos[g] += delta[go] * (step / dist[go])[:, None]
        if arrived.any():
            a = idx[arrived]
            self.pos[a] = self.dest[a]
            self._on_arrival(a, now)

    def _on_arrival(self, idx: np.ndarray, now: float) -> None:
        p = self.params
        executing = self.state[idx] == EntityState.EXECUTING
        if executing.any():
            # Flight to the selected target ends here; the hub-move resolution
            # handles everything else.
            self.errand[idx[executing]] = Errand.IN_HUB
            idx = idx[~executing]
            if len(idx) == 0:
                return
        returning = self.errand[idx] == Errand.RETURNING
        if returning.any():
            r = idx[returning]
            self.errand[r] = Errand.IN_HUB
            self.dwell_until[r] = now + self.pending_delay[r]
            self.pending_delay[r] = 0.0
            uncommitted = self.state[r] == EntityState.UNCOMMITTED
            if uncommitted.any():
                u = r[uncommitted]
                self.timer[u] = now + self.rng.uniform(p.hub_dwell_min, p.hub_dwell_max, size=len(u))
            adv = ~uncommitted
            if adv.any():
                # Advocacy window opens after any bias-reduction delay.
                a = r[adv]
                self.timer[a] = self.dwell_until[a] + p.reassess_period

        outward = idx[~returning]
        if len(outward) == 0:
            return
        with_target = self.target[outward] >= 0
        if with_target.any():
            t = outward[with_target]
            self.errand[t] = Errand.ASSESSING
            self.timer[t] = now + p.assess_duration
        waypoint = outward[~with_target]
        if len(waypoint) > 0:
            cont = self.rng.random(len(waypoint)) < p.waypoint_continue_prob
            if cont.any():
                w = waypoint[cont]
                self.dest[w] = self._sample_waypoints(len(w))
            back = waypoint[~cont]
            if len(back) > 0:
                self.errand[back] = Errand.RETURNING
                self.dest[back] = self.hub + self.rng.uniform(-4.0, 4.0, size=(len(back), 2))

    def _sample_waypoints(self, k: int) -> np.ndarray:
        r = (self.world.config.range_m - 20.0) * np.sqrt(self.rng.random(k))
        theta = self.rng.uniform(0.0, 2.0 * math.pi, size=k)
        pts = self.hub + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        np.clip(pts[:, 0], MAP_MARGIN_M, MAP_W_M - MAP_MARGIN_M, out=pts[:, 0])
        np.clip(pts[:, 1], MAP_MARGIN_M, MAP_H_M - MAP_MARGIN_M, out=pts[:, 1])
        return pts

    def _finish_assessments(self, idx: np.ndarray, now: float, notes: list) -> None:
        p = self.params
        for i in idx:
            tid = int(self.target[i])
            if tid < 0:
                self.errand[i] = Errand.RETURNING
                self.dest[i] = self.hub
                continue
            tgt = self.world.targets[tid]
            d = distance(tgt.position, self.hub)
            q = tgt.value / 100.0
            if p.value_noise_sigma > 0:
                q = min(1.0, max(0.0, q + float(self.rng.normal(0.0, p.value_noise_sigma))))
            first = self.world.register_assessment(tid, self.id)
            self.quality[i] = q
            notes.append(AssessmentNote(int(i), tid, q, first, tgt.evaluations))
            if self.state[i] == EntityState.UNCOMMITTED:
                adoptable = (not tgt.occupied and tid not in self.abandoned
                             and self.rng.random() < p.encounter_favor_prob)
                if adoptable:
                    self.state[i] = EntityState.FAVORING
                    self.support_arr[tid] += 1
                    notes.append(StateChange([int(i)], EntityState.FAVORING, tid, "spontaneous"))
                else:
                    self.target[i] = -1
            self.pending_delay[i] = interaction_delay(d, p, self.model)
            self.errand[i] = Errand.RETURNING
            self.dest[i] = self.hub + self.rng.uniform(-4.0, 4.0, size=2)

    def _scan_discoveries(self, now: float) -> None:
        if len(self._cand_ids) == 0:
            return
        explorers = (~self.lost & (self.state == EntityState.UNCOMMITTED)
                     & (self.errand == Errand.TO_TARGET) & (self.target < 0))
        eidx = np.flatnonzero(explorers)
        if len(eidx) == 0:
            return
        d = np.linalg.norm(self.pos[eidx][:, None, :] - self._cand_pos[None, :, :], axis=2)
        nearest = np.argmin(d, axis=1)
        hit = d[np.arange(len(eidx)), nearest] <= self.params.discovery_radius
        if not hit.any():
            return
        for row in np.flatnonzero(hit):
            i = int(eidx[row])
            tid = int(self._cand_ids[nearest[row]])
            self.target[i] = tid
            self.dest[i] = self.world.positions[tid]

    def _hub_interactions(self, now: float, dt: float, notes: list) -> None:
        if self.model is Model.M3:
            return
        p = self.params
        in_hub = ~self.lost & (self.errand == Errand.IN_HUB)
        adv = in_hub & ((self.state == EntityState.FAVORING) | (self.state == EntityState.COMMITTED))
        ready = adv & (self.dwell_until <= now) & ~np.isnan(self.quality)
        listeners = np.flatnonzero(in_hub & (self.state == EntityState.UNCOMMITTED))

        ridx = np.flatnonzero(ready)
        if len(ridx) > 0 and len(listeners) > 0:
            probs = np.minimum(1.0, p.recruit_gain * p.interaction_frequency_mult * self.quality[ridx])
            wins = self.rng.random(len(ridx)) < probs
            widx = ridx[wins]
            if len(widx) > 0:
                order = self.rng.permutation(listeners)
                k = min(len(widx), len(order))
                for adv_i, lis_i in zip(widx[:k], order[:k]):
                    tid = int(self.target[adv_i])
                    if tid in self.abandoned or self.world.targets[tid].occupied:
                        continue
                    lis = int(lis_i)
                    self.state[lis] = EntityState.FAVORING
                    self.target[lis] = tid
                    self.support_arr[tid] += 1
                    self.timer[lis] = now
                    notes.append(StateChange([lis], EntityState.FAVORING, tid, "recruit"))

        committed_ready = np.flatnonzero(ready & (self.state == EntityState.COMMITTED))
        if len(committed_ready) > 0 and self.phase_target is not None:
            quorum_target = int(self.phase_target)
            convertible = in_hub & (
                (self.state == EntityState.UNCOMMITTED)
                | ((self.state == EntityState.FAVORING) & (self.target == quorum_target))
            )
            cidx = np.flatnonzero(convertible)
            if len(cidx) > 0:
                probs = np.minimum(1.0, p.recruit_gain * p.interaction_frequency_mult
                                   * self.quality[committed_ready])
                wins = committed_ready[self.rng.random(len(committed_ready)) < probs]
                if len(wins) > 0:
                    order = self.rng.permutation(cidx)
                    k = min(len(wins), len(order))
                    for adv_i, oth_i in zip(wins[:k], order[:k]):
                        tid = int(self.target[adv_i])
                        oth = int(oth_i)
                        if self.state[oth] == EntityState.UNCOMMITTED:
                            self.support_arr[tid] += 1
                            self.timer[oth] = now
                        elif int(self.target[oth]) != tid:
                            continue
                        self.state[oth] = EntityState.COMMITTED
                        self.target[oth] = tid
                        notes.append(StateChange([oth], EntityState.COMMITTED, tid, "contact"))

        if p.abandon_gain > 0:
            fav = np.flatnonzero(in_hub & (self.state == EntityState.FAVORING)
                                 & ~np.isnan(self.quality))
            if len(fav) > 0:
                rate = p.abandon_gain * (1.0 - self.quality[fav]) * dt
                quit_mask = self.rng.random(len(fav)) < rate
                for i in fav[quit_mask]:
                    i = int(i)
                    tid = int(self.target[i])
                    self.support_arr[tid] -= 1
                    self.state[i] = EntityState.UNCOMMITTED
                    self.target[i] = -1
                    self.timer[i] = now + self.rng.uniform(p.hub_dwell_min, p.hub_dwell_max)
                    notes.append(StateChange([i], EntityState.UNCOMMITTED, None, "resign"))

    def _hub_departures(self, now: float) -> None:
        due = ~self.lost & (self.errand == Errand.IN_HUB) & (self.timer <= now) & (self.dwell_until <= now)
        if not due.any():
            return
        unc = due & (self.state == EntityState.UNCOMMITTED)
        uidx = np.flatnonzero(unc)
        if len(uidx) > 0:
            self.target[uidx] = -1
            self.dest[uidx] = self._sample_waypoints(len(uidx))
            self.errand[uidx] = Errand.TO_TARGET
        fav = due & (self.state == EntityState.FAVORING)
        fidx = np.flatnonzero(fav)
        if len(fidx) > 0:
            ok = (self.target[fidx] >= 0)
            fidx = fidx[ok]
            if len(fidx) > 0:
                self.dest[fidx] = self.world.positions[self.target[fidx]]
                self.errand[fidx] = Errand.TO_TARGET
        # Committed entities stay in the hub and keep interacting.
        com = due & (self.state == EntityState.COMMITTED)
        if com.any():
            self.timer[com] = np.inf

    # ------------------------------------------------------------------
    # quorums and phase changes
    # ------------------------------------------------------------------

    def detect_quorum(self, now: float, notes: list) -> None:
        if self.phase in (Phase.EXECUTING, Phase.DECIDED) or self.support_arr.max(initial=0) == 0:
            return
        top = int(np.argmax(self.support_arr))
        s = int(self.support_arr[top])
        if self.phase is Phase.DELIBERATING and s >= self._commit_threshold():
            self.phase = Phase.COMMITTED
            self.phase_target = top
            self.commit_time = now
            fav = np.flatnonzero((self.state == EntityState.FAVORING) & (self.target == top) & ~self.lost)
            if len(fav) > 0:
                self.state[fav] = EntityState.COMMITTED
                notes.append(StateChange([int(i) for i in fav], EntityState.COMMITTED, top, "quorum"))
            if self.params.episodic_queuing:
                self.dwell_until[~self.lost] = now
            notes.append(PhaseNote(Phase.COMMITTED, top, "quorum"))
        if (self.model is not Model.M3 and self.phase is Phase.COMMITTED
                and self.phase_target is not None
                and self.support_arr[self.phase_target] >= self._execute_threshold()):
            notes.extend(self.begin_executing(int(self.phase_target), now, "quorum"))

    def begin_executing(self, tid: int, now: float, cause: str) -> list:
        """Lock the decision and send the whole population to the target."""
        notes: list = []
        mid_errand = ~self.lost & (self.errand != Errand.IN_HUB)
        midx = np.flatnonzero(mid_errand)
        if len(midx) > 0 and self.params.p_lost > 0:
            doomed = midx[self.rng.random(len(midx)) < self.params.p_lost]
            if len(doomed) > 0:
                for i in doomed:
                    i = int(i)
                    self.lost[i] = True
                    self.errand[i] = Errand.LOST
                    t = int(self.target[i])
                    if t >= 0 and self.state[i] in (EntityState.FAVORING, EntityState.COMMITTED):
                        self.support_arr[t] -= 1
                notes.append(StateChange([int(i) for i in doomed], None, None, "lost"))
        live = ~self.lost
        live_ids = np.flatnonzero(live)
        self.state[live] = EntityState.EXECUTING
        self.target[live] = tid
        self.errand[live] = Errand.TO_TARGET
        self.dest[live] = self.world.positions[tid] + self.rng.uniform(-6.0, 6.0, size=(len(live_ids), 2))
        self.support_arr[:] = 0
        if self.params.episodic_queuing:
            self.dwell_until[live] = now
        self.phase = Phase.EXECUTING
        self.phase_target = tid
        self.decide_locked = True
        notes.append(StateChange([int(i) for i in live_ids], EntityState.EXECUTING, tid, "execute"))
        notes.append(PhaseNote(Phase.EXECUTING, tid, cause))
        return notes

    def finish_decision(self, now: float, new_hub, budget_left: bool) -> None:
        """Reset after a hub-move resolution; next deliberation starts now."""
        self.hub = np.array(new_hub, dtype=float)
        live = ~self.lost
        n_live = int(live.sum())
        self.state[live] = EntityState.UNCOMMITTED
        self.target[live] = -1
        self.errand[live] = Errand.IN_HUB
        self.pos[live] = self.hub + self.rng.uniform(-6.0, 6.0, size=(n_live, 2))
        self.dest[live] = self.pos[live]
        self.quality[live] = np.nan
        self.dwell_until[live] = now
        self.pending_delay[live] = 0.0
        self.timer[live] = now + self.rng.uniform(0.0, self.params.hub_dwell_max, size=n_live)
        self.support_arr[:] = 0
        self.abandoned.clear()
        self.decide_locked = False
        self.commit_time = None
        self.decisions_made += 1
        if budget_left:
            self.phase = Phase.DELIBERATING
            self.phase_target = None
            self.deliberation_start = now
        else:
            self.phase = Phase.DECIDED
        self._refresh_candidates()

    def on_target_occupied(self, tid: int, now: float, notes: list) -> None:
        """Another collective claimed the target; it is no longer available."""
        if self.phase in (Phase.EXECUTING, Phase.DECIDED):
            self._refresh_candidates()
            return
        adv = np.flatnonzero(~self.lost & (self.target == tid)
                             & ((self.state == EntityState.FAVORING) | (self.state == EntityState.COMMITTED)))
        if len(adv) > 0:
            self.state[adv] = EntityState.UNCOMMITTED
            self.target[adv] = -1
            back = adv[self.errand[adv] != Errand.IN_HUB]
            if len(back) > 0:
                self.errand[back] = Errand.RETURNING
                self.dest[back] = self.hub
            self.timer[adv] = now + self.rng.uniform(self.params.hub_dwell_min,
                                                     self.params.hub_dwell_max, size=len(adv))
            notes.append(StateChange([int(i) for i in adv], EntityState.UNCOMMITTED, None, "occupied"))
        self.support_arr[tid] = 0
        if self.phase is Phase.COMMITTED and self.phase_target == tid:
            self.phase = Phase.DELIBERATING
            self.phase_target = None
            self.commit_time = None
            notes.append(PhaseNote(Phase.DELIBERATING, None, "target_occupied"))
        self._refresh_candidates()

    # ------------------------------------------------------------------
    # operator command applications (validation lives in protocol.py)
    # ------------------------------------------------------------------

    def apply_investigate(self, tid: int, now: float) -> StateChange | None:
        k = int(math.floor(0.05 * self.n))
        unc = ~self.lost & (self.state == EntityState.UNCOMMITTED)
        in_hub = np.flatnonzero(unc & (self.errand == Errand.IN_HUB))
        outside = np.flatnonzero(unc & (self.errand != Errand.IN_HUB))
        order = np.concatenate([self.rng.permutation(in_hub), self.rng.permutation(outside)])
        chosen = order[:k].astype(int)
        if len(chosen) == 0:
            return None
        self.state[chosen] = EntityState.FAVORING
        self.target[chosen] = tid
        self.support_arr[tid] += len(chosen)
        self.dest[chosen] = self.world.positions[tid]
        self.errand[chosen] = Errand.TO_TARGET
        self.dwell_until[chosen] = now
        return StateChange([int(i) for i in chosen], EntityState.FAVORING, tid, "investigate")

    def apply_abandon(self, tid: int, now: float) -> tuple[StateChange | None, PhaseNote | None]:
        self.abandoned.add(tid)
        adv = np.flatnonzero(~self.lost & (self.target == tid)
                             & ((self.state == EntityState.FAVORING) | (self.state == EntityState.COMMITTED)))
        change = None
        if len(adv) > 0:
            self.state[adv] = EntityState.UNCOMMITTED
            self.target[adv] = -1
            out = adv[(self.errand[adv] == Errand.TO_TARGET) | (self.errand[adv] == Errand.ASSESSING)]
            if len(out) > 0:
                self.errand[out] = Errand.RETURNING
                self.dest[out] = self.hub
            self.timer[adv] = now + self.rng.uniform(self.params.hub_dwell_min,
                                                     self.params.hub_dwell_max, size=len(adv))
            change = StateChange([int(i) for i in adv], EntityState.UNCOMMITTED, None, "abandon")
        self.support_arr[tid] = 0
        phase_note = None
        if self.phase is Phase.COMMITTED and self.phase_target == tid:
            self.phase = Phase.DELIBERATING
            self.phase_target = None
            self.commit_time = None
            phase_note = PhaseNote(Phase.DELIBERATING, None, "abandon")
        return change, phase_note

    def cancel_abandon(self, tid: int) -> None:
        self.abandoned.discard(tid)
