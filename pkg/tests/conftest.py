from __future__ import annotations

import numpy as np
import pytest

from swarmhub.collective import Collective, EntityState, Errand, Model, ModelParams
from swarmhub.world import Target, TrialConfig, World


def make_world(targets, hubs, population=200, **config_kw):
    """World from (x, y, value) triples and explicit hub coordinates."""
    cfg = TrialConfig(n_targets=len(targets), n_collectives=len(hubs),
                      population=population, **config_kw)
    tgts = [Target(id=i, position=np.array([x, y], dtype=float), value=v)
            for i, (x, y, v) in enumerate(targets)]
    return World(tgts, np.array(hubs, dtype=float), cfg)


def make_collective(world, model=Model.M1, population=None, seed=0, cid=0, **params_kw):
    params = ModelParams.for_model(model, **params_kw)
    rng = np.random.Generator(np.random.PCG64(seed))
    n = population if population is not None else world.config.population
    return Collective(cid, "I", world.hubs[cid], n, model, params, rng, world)


def force_advocates(col, target_id, entity_ids, state=EntityState.FAVORING,
                    quality=None, in_hub=True):
    """Put entities into an advocacy state directly, keeping the ledger true."""
    for i in entity_ids:
        prev = int(col.target[i])
        if prev >= 0 and col.state[i] in (EntityState.FAVORING, EntityState.COMMITTED) and not col.lost[i]:
            col.support_arr[prev] -= 1
        col.state[i] = state
        col.target[i] = target_id
        if in_hub:
            col.errand[i] = Errand.IN_HUB
            col.pos[i] = col.hub
        if quality is not None:
            col.quality[i] = quality
        if not col.lost[i] and state in (EntityState.FAVORING, EntityState.COMMITTED):
            col.support_arr[target_id] += 1


@pytest.fixture
def two_target_world():
    # One hub with a near low-value target and a far high-value target.
    return make_world(
        targets=[(487.0 - 100.0, 274.0, 80), (487.0 + 450.0, 274.0, 90)],
        hubs=[[487.0, 274.0]],
        population=200,
    )
