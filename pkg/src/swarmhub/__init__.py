"""swarmhub: deterministic hub-based collective simulator and operator service."""

from .collective import (Collective, Entity, EntityState, Errand, Model,
                         ModelParams, Phase, assess_target, commit_via_contact,
                         interaction_delay, recruit, recruit_probability)
from .engine import (ComponentResult, Simulation, TrialResult, make_policy,
                     run_headless)
from .metrics import (ClutterConstants, DecisionRecord, SALevel, SAProbe,
                      VisualizationMode, global_clutter, schedule_probes,
                      score_sa)
from .protocol import (Assignment, Cause, CommandKind, OperatorCommand,
                       SystemMessage, validate_command)
from .replay import replay
from .scenario import Scenario, load_scenario, scenario_from_dict
from .world import (Difficulty, Target, TrialConfig, World, in_range,
                    trial_should_end)

__version__ = "0.1.0"
