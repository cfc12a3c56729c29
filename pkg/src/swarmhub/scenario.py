"""Scenario files: JSON documents selecting difficulty, seed, and overrides.

Schema (all keys optional unless noted)::

    {
      "seed": 1234,                      // 64-bit trial seed
      "components": ["easy", "hard"],    // difficulties, in order
      "model": "M2",                     // default model, CLI may override
      "params": {"recruit_gain": 0.02},  // ModelParams field overrides
      "trial": {"population": 200},      // TrialConfig field overrides
      "targets": [{"x": m, "y": m, "value": 67..100}, ...],  // explicit layout
      "hubs": [[x, y], ...]              // explicit hub positions (meters)
    }

Explicit targets/hubs bypass the difficulty generator (useful for tests and
reduced worlds).
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .collective import Model, ModelParams
from .world import HUB_POSITIONS_M, Difficulty, Target, TrialConfig

_PARAM_FIELDS = {f.name for f in dataclasses.fields(ModelParams)}
_TRIAL_FIELDS = {f.name for f in dataclasses.fields(TrialConfig)} - {"difficulty", "seed"}


class ScenarioError(Exception):
    pass


@dataclass
class Scenario:
    seed: int = 0
    components: list[Difficulty] = field(default_factory=lambda: [Difficulty.EASY, Difficulty.HARD])
    model: Model = Model.M2
    param_overrides: dict = field(default_factory=dict)
    trial_overrides: dict = field(default_factory=dict)
    explicit_targets: list[dict] | None = None
    explicit_hubs: list[list[float]] | None = None

    def trial_config(self, difficulty: Difficulty, seed: int) -> TrialConfig:
        cfg = dict(self.trial_overrides)
        if self.explicit_targets is not None:
            cfg.setdefault("n_targets", len(self.explicit_targets))
        if self.explicit_hubs is not None:
            cfg.setdefault("n_collectives", len(self.explicit_hubs))
        return TrialConfig(difficulty=difficulty, seed=seed, **cfg)

    def params(self, model: Model) -> ModelParams:
        return ModelParams.for_model(model, **self.param_overrides)

    def hubs(self, n: int) -> np.ndarray:
        if self.explicit_hubs is not None:
            return np.array(self.explicit_hubs, dtype=float)
        return HUB_POSITIONS_M[:n].copy()

    def targets(self) -> list[Target] | None:
        if self.explicit_targets is None:
            return None
        out = []
        for i, spec in enumerate(self.explicit_targets):
            out.append(Target(id=i, position=np.array([spec["x"], spec["y"]], dtype=float),
                              value=int(spec["value"])))
        return out

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "components": [c.value for c in self.components],
            "model": self.model.value,
            "params": dict(self.param_overrides),
            "trial": dict(self.trial_overrides),
            "targets": self.explicit_targets,
            "hubs": self.explicit_hubs,
        }


def scenario_from_dict(doc: dict) -> Scenario:
    unknown = set(doc) - {"seed", "components", "difficulty", "model", "params",
                          "trial", "targets", "hubs"}
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")

    components: list[Difficulty]
    if "components" in doc:
        components = [Difficulty(str(c).lower()) for c in doc["components"]]
    elif "difficulty" in doc:
        components = [Difficulty(str(doc["difficulty"]).lower())]
    else:
        components = [Difficulty.EASY, Difficulty.HARD]

    params = dict(doc.get("params", {}))
    bad = set(params) - _PARAM_FIELDS
    if bad:
        raise ScenarioError(f"unknown params overrides: {sorted(bad)}")
    trial = dict(doc.get("trial", {}))
    bad = set(trial) - _TRIAL_FIELDS
    if bad:
        raise ScenarioError(f"unknown trial overrides: {sorted(bad)}")

    try:
        model = Model(doc.get("model", "M2"))
    except ValueError as exc:
        raise ScenarioError(f"unknown model {doc.get('model')!r}") from exc

    targets = doc.get("targets")
    if targets is not None:
        for spec in targets:
            if not {"x", "y", "value"} <= set(spec):
                raise ScenarioError("each target needs x, y, value")

    return Scenario(
        seed=int(doc.get("seed", 0)),
        components=components,
        model=model,
        param_overrides=params,
        trial_overrides=trial,
        explicit_targets=targets,
        explicit_hubs=doc.get("hubs"),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(doc)
