"""Acceptance criteria, each exercised at its stated scale and tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion. Heavy batches run once in a module fixture on a process pool.
"""
from __future__ import annotations

import json
import time
from fractions import Fraction
from multiprocessing import Pool

import numpy as np
import pytest

from swarmhub.collective import Model
from swarmhub.engine import Simulation, run_headless
from swarmhub.metrics import (DEFAULT_CLUTTER, VisualizationMode,
                              global_clutter, schedule_probes)
from swarmhub.replay import replay
from swarmhub.scenario import Scenario
from swarmhub.world import Difficulty, TrialConfig, trial_should_end

from accept_helpers import fuzz_seed, run_cell, run_two_target

N_HARD_SEEDS = 50
N_EASY_SEEDS = 100
N_M3_SEEDS = 50
N_FUZZ_SEEDS = 100
FUZZ_EVENTS = 10_000


def _pool_map(fn, jobs):
    with Pool(2) as pool:
        return pool.map(fn, jobs)


@pytest.fixture(scope="module")
def batches():
    """All heavy seed batches, computed once."""
    out = {}

    t0 = time.time()
    jobs = ([{"model": "M2", "difficulty": "hard", "seed": 1000 + s}
             for s in range(N_HARD_SEEDS)]
            + [{"model": "M1", "difficulty": "hard", "seed": 1000 + s}
               for s in range(N_HARD_SEEDS)])
    rows = _pool_map(run_cell, jobs)
    out["m2_hard"] = [r for r in rows if r["model"] == "M2"]
    out["m1_hard"] = [r for r in rows if r["model"] == "M1"]
    out["separation_wall_s"] = time.time() - t0

    out["m2_easy"] = _pool_map(run_cell, [
        {"model": "M2", "difficulty": "easy", "seed": 2000 + s}
        for s in range(N_EASY_SEEDS)])

    out["m3_null"] = _pool_map(run_cell, [
        {"model": "M3", "difficulty": "easy", "policy": "null", "seed": 3000 + s,
         "scenario": {"components": ["easy"], "trial": {"max_sim_time": 600.0}}}
        for s in range(N_M3_SEEDS)])
    out["m3_greedy"] = _pool_map(run_cell, [
        {"model": "M3", "difficulty": "easy", "policy": "greedy", "seed": 4000 + s}
        for s in range(N_M3_SEEDS)])
    return out


def _decisions(rows):
    return [d for r in rows for d in r["decisions"]]


def _success_rate(rows):
    decisions = _decisions(rows)
    return 100.0 * sum(d["success"] for d in decisions) / len(decisions)


def _mean_minutes(rows):
    decisions = _decisions(rows)
    return float(np.mean([d["duration_min"] for d in decisions]))


# ----------------------------------------------------------------------
# Criterion 1: Eq.-1 exactness, linearity, and mode offset. Runtime < 1 s.
# ----------------------------------------------------------------------

def test_criterion_clutter_exactness():
    t0 = time.time()
    k = DEFAULT_CLUTTER

    def exact(h, t, wt, wc, ia):
        area = (k.static_components + k.hub_icons + h * k.highlighted_target
                + t * k.plain_target + (k.entity_dots if ia else 0)
                + wt * k.target_window + wc * k.collective_window)
        return Fraction(area * 100, k.screen_area)

    cases = [
        ((0, 0, 0, 0), VisualizationMode.COLLECTIVE, 24.2704),
        ((0, 0, 0, 0), VisualizationMode.IA, 26.7395),
        ((2, 3, 1, 1), VisualizationMode.COLLECTIVE, 27.5748),
    ]
    for counts, mode, approx in cases:
        got = global_clutter(*counts, mode)
        want = float(exact(*counts, mode is VisualizationMode.IA))
        assert abs(got - want) / want <= 1e-9
        assert abs(got - approx) < 5e-5

    rng = np.random.default_rng(0)
    offset = k.entity_dots / k.screen_area * 100.0
    slopes = np.array([k.highlighted_target, k.plain_target,
                       k.target_window, k.collective_window]) / k.screen_area * 100.0
    for _ in range(1000):
        c = rng.integers(0, 20, size=4)
        base = global_clutter(*c, VisualizationMode.COLLECTIVE)
        ia = global_clutter(*c, VisualizationMode.IA)
        assert ia - base == pytest.approx(offset, abs=1e-12)
        for i in range(4):
            bumped = c.copy()
            bumped[i] += 1
            delta = global_clutter(*bumped, VisualizationMode.COLLECTIVE) - base
            assert delta == pytest.approx(slopes[i], abs=1e-9)
    elapsed = time.time() - t0
    assert elapsed < 1.0
    print(f"\nPASS clutter exactness: 3 reference values <=1e-9 rel, "
          f"linearity+offset over 1000 vectors, {elapsed:.2f}s")


# ----------------------------------------------------------------------
# Criterion 2: state-machine invariant fuzz. Runtime < 2 min.
# ----------------------------------------------------------------------

def test_criterion_state_machine_fuzz():
    t0 = time.time()
    results = _pool_map(fuzz_seed, list(range(N_FUZZ_SEEDS)))
    elapsed = time.time() - t0
    bad = [r for r in results if r["violations"]]
    for r in bad[:5]:
        print("violations:", r["seed"], r["violations"][:3])
    assert not bad
    assert elapsed < 120.0
    print(f"\nPASS state-machine fuzz: {N_FUZZ_SEEDS} seeds x {FUZZ_EVENTS} events, "
          f"no invariant violations, {elapsed:.1f}s")


# ----------------------------------------------------------------------
# Criterion 3: autonomous model separation on hard scenarios. < 5 min.
# ----------------------------------------------------------------------

def test_criterion_model_separation(batches):
    m2, m1 = batches["m2_hard"], batches["m1_hard"]
    n2, n1 = len(_decisions(m2)), len(_decisions(m1))
    assert n2 >= 200 and n1 >= 200
    gap = _success_rate(m2) - _success_rate(m1)
    t2, t1 = _mean_minutes(m2), _mean_minutes(m1)
    assert gap >= 10.0, f"accuracy gap {gap:.1f}pp"
    assert t2 >= t1, f"M2 {t2:.2f}min vs M1 {t1:.2f}min"
    assert batches["separation_wall_s"] < 300.0
    print(f"\nPASS model separation: {n2}+{n1} hard decisions, "
          f"M2 {_success_rate(m2):.1f}% vs M1 {_success_rate(m1):.1f}% "
          f"(gap {gap:.1f}pp), time {t2:.2f} vs {t1:.2f} min, "
          f"{batches['separation_wall_s']:.0f}s wall")


# ----------------------------------------------------------------------
# Criterion 4: M3 requires the operator.
# ----------------------------------------------------------------------

def test_criterion_m3_requires_operator(batches):
    null_decisions = [len(r["decisions"]) for r in batches["m3_null"]]
    assert all(n == 0 for n in null_decisions)
    greedy = batches["m3_greedy"]
    rate = _success_rate(greedy)
    assert rate >= 95.0, f"greedy success {rate:.1f}%"
    print(f"\nPASS M3 operator dependence: 0 decisions across {len(null_decisions)} "
          f"null seeds; greedy success {rate:.1f}% over {len(_decisions(greedy))} decisions")


# ----------------------------------------------------------------------
# Criterion 5: decision-time calibration band.
# ----------------------------------------------------------------------

def test_criterion_decision_time_band(batches):
    easy = batches["m2_easy"][:N_HARD_SEEDS]
    hard = batches["m2_hard"]
    te, th = _mean_minutes(easy), _mean_minutes(hard)
    assert 2.0 <= te <= 8.0, f"easy mean {te:.2f}min"
    assert 2.0 <= th <= 8.0, f"hard mean {th:.2f}min"
    assert te < th
    print(f"\nPASS decision-time band: easy {te:.2f} min < hard {th:.2f} min, "
          f"both within [2, 8] over {len(easy) + len(hard)} seeds")


# ----------------------------------------------------------------------
# Criterion 6: trial protocol (probe schedule and termination rules).
# ----------------------------------------------------------------------

def test_criterion_trial_protocol(batches):
    sc = Scenario(seed=77, components=[Difficulty.EASY, Difficulty.HARD])
    result = run_headless(sc, model=Model.M1, seed=77)
    c0, c1 = result.components
    assert len(c0.probes) == 6 and len(c1.probes) == 6
    for comp in (c0, c1):
        base = schedule_probes(comp.start_time)
        assert base == [comp.start_time + 50.0 + 60.0 * k for k in range(6)]
        for probe, slot in zip(comp.probes, base):
            # voided probes move by whole one-minute increments, never earlier
            assert probe.ask_time >= slot
            assert (probe.ask_time - slot) % 60.0 == pytest.approx(0.0, abs=1e-9)
    levels = [p.level.value for p in result.probes]
    assert (levels.count("sa1"), levels.count("sa2"), levels.count("sa3")) == (5, 4, 3)

    cfg = TrialConfig()
    assert trial_should_end(8, 570.0, cfg)            # 8th decision at 9:30
    assert trial_should_end(6, 605.0, cfg)            # 6th decision at 10:05
    assert not trial_should_end(5, 605.0, cfg)        # 5th decision at 10:05
    assert not trial_should_end(6, 599.0, cfg)

    for rows in (batches["m2_hard"], batches["m1_hard"], batches["m2_easy"]):
        for r in rows:
            assert len(r["decisions"]) <= 8
            assert r["per_collective_max"] <= 2
            if r["end_reason"] == "timeout_cap":
                assert 6 <= len(r["decisions"]) <= 7
                assert r["elapsed"] > 600.0
    print("\nPASS trial protocol: 6 probes/component at 50+60k, 12 per trial "
          "(5/4/3 mix), termination rules hold on edge cases and all batches")


# ----------------------------------------------------------------------
# Criterion 7: determinism and replay.
# ----------------------------------------------------------------------

def test_criterion_determinism_and_replay(tmp_path):
    script = [
        {"t": 3.0, "ui": {"ui": "layout", "mode": "ia", "highlighted": 1, "plain": 4}},
        {"t": 30.0, "ui": {"ui": "window", "action": "open", "window": "target", "subject": 0}},
        {"t": 75.0, "ui": {"ui": "window", "action": "close", "window": "target", "subject": 0}},
        {"t": 120.0, "command": {"kind": "investigate", "collective": 1, "target": 2}},
        {"t": 300.0, "command": {"kind": "abandon", "collective": 0, "target": 5}},
    ]
    sc = Scenario(seed=91, components=[Difficulty.EASY, Difficulty.HARD])
    kw = dict(model=Model.M2, policy="null", seed=91, probe_responder="oracle",
              script=[dict(s) for s in script])
    a = run_headless(sc, **kw)
    b = run_headless(sc, **kw)
    assert a.log.dumps() == b.log.dumps()

    path = tmp_path / "events.jsonl"
    a.log.dump(path)
    replayed = replay(path)
    assert json.dumps(replayed.to_dict(), sort_keys=True) == \
        json.dumps(a.to_dict(), sort_keys=True)
    print(f"\nPASS determinism & replay: byte-identical logs "
          f"({len(a.log.events)} events), replayed metrics exact")


# ----------------------------------------------------------------------
# Supporting behavioral oracles (not numbered criteria).
# ----------------------------------------------------------------------

def test_two_target_distance_bias_oracle():
    # The bias-reduced model picks the far high-value target more often than
    # the value-only model over 200 seeded runs per model.
    n = 200
    jobs2 = [{"model": "M2", "seed": 5000 + s} for s in range(n)]
    jobs1 = [{"model": "M1", "seed": 5000 + s} for s in range(n)]
    far2 = sum(r["picked_far_high"] for r in _pool_map(run_two_target, jobs2))
    far1 = sum(r["picked_far_high"] for r in _pool_map(run_two_target, jobs1))
    assert far2 > far1, f"M2 {far2}/{n} vs M1 {far1}/{n}"
    print(f"\nPASS two-target bias oracle: far high target picked "
          f"M2 {far2}/{n} vs M1 {far1}/{n}")


def test_m2_easy_runs_complete_full_budget(batches):
    rows = batches["m2_easy"]
    frac = sum(r["full"] for r in rows) / len(rows)
    assert frac >= 0.95, f"only {frac:.0%} of trials completed all 8 decisions"
    print(f"\nPASS M2 easy completion: {frac:.0%} of {len(rows)} seeds finished "
          f"two decisions per collective")


def test_ten_sim_minutes_under_ten_seconds_wall():
    sc = Scenario(seed=88, components=[Difficulty.EASY],
                  trial_overrides={"max_sim_time": 600.0,
                                   "decisions_per_collective": 99,
                                   "decision_cap_on_timeout": 9999})
    sim = Simulation(sc, Difficulty.EASY, Model.M2, seed=88)
    t0 = time.time()
    while sim.end_reason is None:
        sim.tick()
    wall = time.time() - t0
    assert sim.now >= 600.0
    assert wall < 10.0, f"{wall:.1f}s for 10 simulated minutes"
    print(f"\nPASS tick throughput: 10 sim-minutes in {wall:.1f}s wall")
