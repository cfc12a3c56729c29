"""Environment geometry, target generation, and sequential-decision bookkeeping.

The map is a static 1920x1080 pixel plane at 1.97 px/m; everything here works
in meters and converts to pixels only for telemetry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PX_PER_M = 1.97
MAP_W_PX = 1920
MAP_H_PX = 1080
MAP_W_M = MAP_W_PX / PX_PER_M
MAP_H_M = MAP_H_PX / PX_PER_M

SEARCH_RANGE_M = 500.0

# Hubs sit toward the corners so a central band of the map is more than 350 m
# from every hub (needed for hard layouts) while still inside every search range.
HUB_POSITIONS_M = np.array(
    [
        [125.0, 95.0],
        [MAP_W_M - 125.0, 95.0],
        [125.0, MAP_H_M - 95.0],
        [MAP_W_M - 125.0, MAP_H_M - 95.0],
    ]
)

ROMAN_LABELS = ("I", "II", "III", "IV")

VALUE_MIN = 67
VALUE_MAX = 100
# A target counts as "high value" when its value lands in the top quarter of
# the admissible value span.
TOP_QUARTILE_VALUE = 92

EASY_NEAR_M = 250.0
HARD_FAR_M = 350.0
MIN_TARGET_SEPARATION_M = 40.0
MAP_MARGIN_M = 12.0


class Difficulty(Enum):
    EASY = "easy"
    HARD = "hard"


class GenerationError(Exception):
    """Raised when a feasible target layout cannot be found."""


def meters_to_px(point) -> tuple[float, float]:
    return (float(point[0]) * PX_PER_M, float(point[1]) * PX_PER_M)


def distance(a, b) -> float:
    return math.hypot(float(a[0]) - float(b[0]), float(a[1]) - float(b[1]))


def in_range(hub, target_pos, range_m: float = SEARCH_RANGE_M) -> bool:
    """True when the point is within the search range (closed boundary)."""
    return distance(hub, target_pos) <= range_m


@dataclass
class Target:
    id: int
    position: np.ndarray
    value: int
    discovered_by: set[int] = field(default_factory=set)
    evaluations: int = 0
    occupied: bool = False

    @property
    def valued(self) -> bool:
        """Value becomes visible once two entities have assessed the target."""
        return self.evaluations >= 2

    @property
    def discovered(self) -> bool:
        return bool(self.discovered_by)


@dataclass
class TrialConfig:
    difficulty: Difficulty = Difficulty.EASY
    n_targets: int = 16
    n_collectives: int = 4
    population: int = 200
    range_m: float = SEARCH_RANGE_M
    seed: int = 0
    decisions_per_collective: int = 2
    component_time_limit: float = 600.0
    decision_cap_on_timeout: int = 6
    max_sim_time: float = 2400.0

    def __post_init__(self) -> None:
        if isinstance(self.difficulty, str):
            self.difficulty = Difficulty(self.difficulty.lower())
        if self.n_targets <= 0 or self.population <= 0 or self.n_collectives <= 0:
            raise ValueError("counts must be positive")
        if self.component_time_limit <= 0 or self.range_m <= 0:
            raise ValueError("limits must be positive")

    @property
    def total_decision_cap(self) -> int:
        return self.n_collectives * self.decisions_per_collective


@dataclass
class MoveOutcome:
    """Result of one collective attempting to relocate onto a target."""

    established: bool
    collective_id: int
    target_id: int
    previous_hub: tuple[float, float]

    @property
    def returned(self) -> bool:
        return not self.established


def trial_should_end(total_decisions: int, elapsed: float, config: TrialConfig) -> bool:
    """Component termination: full decision budget, or the timeout cap.

    The component ends when every collective spent its budget (8 decisions by
    default), or as soon as `decision_cap_on_timeout` (6) decisions exist while
    the elapsed time exceeds the ten-minute component limit.
    """
    if total_decisions >= config.total_decision_cap:
        return True
    if total_decisions >= config.decision_cap_on_timeout and elapsed > config.component_time_limit:
        return True
    return False


def _sample_point_near(rng, hub, dist_lo, dist_hi):
    for _ in range(400):
        r = rng.uniform(dist_lo, dist_hi)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        x = hub[0] + r * math.cos(theta)
        y = hub[1] + r * math.sin(theta)
        if MAP_MARGIN_M <= x <= MAP_W_M - MAP_MARGIN_M and MAP_MARGIN_M <= y <= MAP_H_M - MAP_MARGIN_M:
            return np.array([x, y])
    raise GenerationError(f"no in-map point near hub {hub} at {dist_lo}-{dist_hi} m")


def _separated(pos, placed) -> bool:
    return all(distance(pos, q) >= MIN_TARGET_SEPARATION_M for q in placed)


def _place(rng, hub, lo, hi, placed, extra_ok=None):
    for _ in range(300):
        pos = _sample_point_near(rng, hub, lo, hi)
        if not _separated(pos, placed):
            continue
        if extra_ok is not None and not extra_ok(pos):
            continue
        return pos
    raise GenerationError("could not separate targets after bounded retries")


def _far_from_all_hubs(pos, hubs, min_d=HARD_FAR_M) -> bool:
    return all(distance(pos, h) >= min_d for h in hubs)


def generate_targets(config: TrialConfig, rng: np.random.Generator,
                     hubs: np.ndarray | None = None) -> list[Target]:
    """Generate one component's target layout for the configured difficulty.

    Easy: every hub gets two high-value targets within 250 m. Hard: every
    high-value target stays at least 350 m from every hub, with low-value
    decoys placed close in. Both layouts keep some targets inside two or more
    search ranges and every value inside [67, 100].
    """
    if hubs is None:
        hubs = HUB_POSITIONS_M[: config.n_collectives]
    for attempt in range(60):
        try:
            targets = _generate_once(config, rng, hubs)
        except GenerationError:
            continue
        if _shared_range_exists(targets, hubs, config.range_m):
            return targets
    raise GenerationError("infeasible target placement after bounded retries")


def _shared_range_exists(targets, hubs, range_m) -> bool:
    for t in targets:
        n_in = sum(1 for h in hubs if in_range(h, t.position, range_m))
        if n_in >= 2:
            return True
    return False


def _generate_once(config, rng, hubs) -> list[Target]:
    placed: list[np.ndarray] = []
    specs: list[tuple[np.ndarray, int]] = []
    n_hubs = len(hubs)

    if config.difficulty is Difficulty.EASY:
        for hub in hubs:
            for _ in range(2):
                pos = _place(rng, hub, 80.0, EASY_NEAR_M, placed)
                placed.append(pos)
                specs.append((pos, int(rng.integers(TOP_QUARTILE_VALUE, VALUE_MAX + 1))))
        n_fill = config.n_targets - len(specs)
        for k in range(n_fill):
            hub = hubs[int(rng.integers(0, n_hubs))]
            pos = _place(rng, hub, 60.0, config.range_m - 20.0, placed)
            placed.append(pos)
            specs.append((pos, int(rng.integers(VALUE_MIN, TOP_QUARTILE_VALUE))))
    else:
        center = np.array([MAP_W_M / 2.0, MAP_H_M / 2.0])
        for hub in hubs:
            # One high-value target per hub, center-ward so it clears every hub.
            def toward_center(pos, hub=hub):
                return _far_from_all_hubs(pos, hubs) and distance(pos, hub) <= config.range_m - 20.0
            base = center + rng.uniform(-60.0, 60.0, size=2)
            pos = _place(rng, base, 0.0, 90.0, placed, extra_ok=toward_center)
            placed.append(pos)
            specs.append((pos, int(rng.integers(93, VALUE_MAX + 1))))
        for hub in hubs:
            for _ in range(2):
                pos = _place(rng, hub, 70.0, 220.0, placed)
                placed.append(pos)
                specs.append((pos, int(rng.integers(VALUE_MIN, 86))))
        n_fill = config.n_targets - len(specs)
        for k in range(n_fill):
            hub = hubs[int(rng.integers(0, n_hubs))]
            pos = _place(rng, hub, 100.0, config.range_m - 20.0, placed,
                         extra_ok=lambda p: True)
            placed.append(pos)
            specs.append((pos, int(rng.integers(VALUE_MIN, 89))))

    return [Target(id=i, position=pos, value=val) for i, (pos, val) in enumerate(specs)]


class World:
    """Targets plus hub occupancy for one trial component."""

    def __init__(self, targets: list[Target], hubs: np.ndarray, config: TrialConfig):
        self.targets = targets
        self.hubs = np.array(hubs, dtype=float)
        self.config = config
        self.positions = np.array([t.position for t in targets], dtype=float)
        self.values = np.array([t.value for t in targets], dtype=float)
        self.occupied = np.zeros(len(targets), dtype=bool)

    @classmethod
    def generate(cls, config: TrialConfig, rng: np.random.Generator) -> "World":
        hubs = HUB_POSITIONS_M[: config.n_collectives].copy()
        targets = generate_targets(config, rng, hubs)
        return cls(targets, hubs, config)

    @classmethod
    def from_explicit(cls, config: TrialConfig, targets: list[Target],
                      hubs: np.ndarray) -> "World":
        return cls(targets, np.array(hubs, dtype=float), config)

    def target(self, tid: int) -> Target:
        return self.targets[tid]

    def in_range_mask(self, hub_pos) -> np.ndarray:
        d = np.linalg.norm(self.positions - np.asarray(hub_pos), axis=1)
        return d <= self.config.range_m

    def register_assessment(self, tid: int, collective_id: int) -> bool:
        """Count an assessment; returns True when this is a first discovery."""
        t = self.targets[tid]
        first = collective_id not in t.discovered_by
        t.discovered_by.add(collective_id)
        t.evaluations += 1
        return first

    def claim(self, tid: int, collective_id: int, previous_hub) -> MoveOutcome:
        """Arbitrate a hub move: the first claimant establishes, later ones return."""
        t = self.targets[tid]
        prev = (float(previous_hub[0]), float(previous_hub[1]))
        if t.occupied:
            return MoveOutcome(False, collective_id, tid, prev)
        t.occupied = True
        self.occupied[tid] = True
        return MoveOutcome(True, collective_id, tid, prev)

    def ground_truth_best(self, hub_pos) -> tuple[int | None, int | None]:
        """Highest-valued unoccupied target inside range of the hub (ground truth)."""
        mask = self.in_range_mask(hub_pos) & ~self.occupied
        if not mask.any():
            return None, None
        idx = np.flatnonzero(mask)
        best = idx[np.argmax(self.values[idx])]
        return int(best), int(self.values[best])
