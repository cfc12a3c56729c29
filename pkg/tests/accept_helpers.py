"""Batch and fuzz workers for the acceptance suite (multiprocessing-safe)."""
from __future__ import annotations

import numpy as np

from swarmhub.collective import Model
from swarmhub.engine import run_headless
from swarmhub.protocol import CommandKind, OperatorCommand
from swarmhub.scenario import scenario_from_dict
from swarmhub.world import Difficulty


def run_cell(job: dict) -> dict:
    """One headless trial, summarized compactly for aggregation."""
    scenario = scenario_from_dict(job.get("scenario", {"components": [job["difficulty"]]}))
    scenario.seed = job["seed"]
    result = run_headless(scenario, model=Model(job["model"]),
                          policy=job.get("policy"), seed=job["seed"])
    comp = result.components[0]
    per_collective: dict[int, int] = {}
    for d in comp.decisions:
        per_collective[d.collective_id] = per_collective.get(d.collective_id, 0) + 1
    return {
        "seed": job["seed"],
        "model": job["model"],
        "difficulty": job["difficulty"],
        "end_reason": comp.end_reason,
        "elapsed": comp.end_time - comp.start_time,
        "decisions": [
            {
                "duration_min": d.duration_minutes,
                "success": d.success,
                "established": d.established,
                "value": d.selected_value,
                "best": d.ground_truth_best_value,
                "target": d.selected_target,
                "collective": d.collective_id,
                "index": d.index,
            }
            for d in comp.decisions
        ],
        "full": len(comp.decisions) == 8,
        "per_collective_max": max(per_collective.values(), default=0),
    }


def run_two_target(job: dict) -> dict:
    """Single-collective scenario with a far high target and a near decoy."""
    scenario = scenario_from_dict({
        "components": ["easy"],
        "targets": [
            {"x": 387.0, "y": 274.0, "value": 80},   # 100 m
            {"x": 937.0, "y": 274.0, "value": 90},   # 450 m
        ],
        "hubs": [[487.0, 274.0]],
        "trial": {"decisions_per_collective": 1, "max_sim_time": 900.0},
    })
    scenario.seed = job["seed"]
    result = run_headless(scenario, model=Model(job["model"]), seed=job["seed"])
    decisions = result.components[0].decisions
    return {"picked_far_high": bool(decisions and decisions[0].selected_target == 1)}


COMMAND_KINDS = [CommandKind.INVESTIGATE, CommandKind.ABANDON,
                 CommandKind.DECIDE, CommandKind.CANCEL_ABANDON]


def _snapshot_state(col):
    return (col.state.tobytes(), col.target.tobytes(), col.lost.tobytes(),
            col.support_arr.tobytes(), tuple(sorted(col.abandoned)),
            col.phase, col.phase_target, col.decide_locked)


def fuzz_seed(seed: int, n_events: int = 10_000) -> dict:
    """Random command/tick stream against four collectives; returns violations."""
    from swarmhub.engine import Simulation

    scenario = scenario_from_dict({"components": ["easy"]})
    scenario.seed = seed
    sim = Simulation(scenario, Difficulty.EASY, Model.M1, seed=seed)
    world, station = sim.world, sim.station
    cols = sim.collectives
    rng = np.random.default_rng(seed + 77)

    # Pre-value half the targets so accepted command paths get exercised early.
    for t in world.targets[::2]:
        t.discovered_by.add(0)
        t.evaluations = 2

    violations: list[str] = []
    established_by_target: dict[int, int] = {}
    abandon_pairs: list[tuple[int, int]] = []

    def check_invariants(tag: str) -> None:
        for col in cols.values():
            if sum(col.state_counts().values()) != col.n:
                violations.append(f"{tag}: population not conserved (col {col.id})")
            ledger = {k: v for k, v in col.support.items() if v > 0}
            if ledger != col.recompute_support():
                violations.append(f"{tag}: support ledger mismatch (col {col.id})")
            if (col.support_arr < 0).any():
                violations.append(f"{tag}: negative support (col {col.id})")

    for k in range(n_events):
        roll = rng.random()
        if roll < 0.08:
            sim.tick()
        elif roll < 0.10 and abandon_pairs:
            # duplicate-abandon idempotence probe
            cid, tid = abandon_pairs[int(rng.integers(0, len(abandon_pairs)))]
            col = cols[cid]
            if tid in col.abandoned and not col.decide_locked:
                before = _snapshot_state(col)
                verdict, _, _ = station.process(
                    OperatorCommand(CommandKind.ABANDON, cid, tid), sim.now)
                if verdict.accepted and _snapshot_state(col) != before:
                    violations.append(f"event {k}: duplicate abandon changed state")
        else:
            kind = COMMAND_KINDS[int(rng.integers(0, 4))]
            cid = int(rng.integers(0, 5))            # sometimes invalid
            tid = int(rng.integers(0, 18))           # sometimes invalid
            cmd = OperatorCommand(kind, cid, None if kind is CommandKind.CANCEL_ABANDON else tid)
            if kind is CommandKind.CANCEL_ABANDON:
                known = list(station.assignments)
                cmd.assignment_ref = (known[int(rng.integers(0, len(known)))]
                                      if known and rng.random() < 0.7
                                      else int(rng.integers(0, 500)))
            col = cols.get(cid)
            locked_before = col.decide_locked if col is not None else False
            state_before = _snapshot_state(col) if locked_before else None
            verdict, record, _ = station.process(cmd, sim.now)
            if verdict.accepted and locked_before:
                violations.append(f"event {k}: accepted command on locked collective")
            if not verdict.accepted and locked_before and state_before is not None:
                if _snapshot_state(col) != state_before:
                    violations.append(f"event {k}: rejected command mutated locked collective")
            if verdict.accepted and kind is CommandKind.ABANDON:
                abandon_pairs.append((cid, tid))
            if verdict.accepted and kind is CommandKind.DECIDE:
                # resolve the hub move immediately some of the time
                if rng.random() < 0.7:
                    out = world.claim(tid, cid, cols[cid].hub)
                    established_by_target[tid] = established_by_target.get(tid, 0) + out.established
                    if established_by_target[tid] > 1:
                        violations.append(f"event {k}: two hubs established on target {tid}")
                    new_hub = world.positions[tid] if out.established else cols[cid].hub
                    budget_left = cols[cid].decisions_made + 1 < 2
                    cols[cid].finish_decision(sim.now, new_hub, budget_left)
                    station.on_decision_complete(cid)
                    if out.established:
                        for other in cols.values():
                            if other.id != cid:
                                other.on_target_occupied(tid, sim.now, [])
        if k % 97 == 0:
            check_invariants(f"event {k}")
        if violations:
            break

    check_invariants("final")
    for rec in station.records:
        if rec.accepted and rec.kind is CommandKind.ABANDON and rec.support_at_issue:
            pass
    return {"seed": seed, "violations": violations, "events": n_events}
