"""beliefsim: agent-based simulation of interacting belief networks.

Agents hold complete signed weighted belief networks over concepts (self,
neighbors, a neutral item, two group identities). Beliefs spread by social
transmission and settle under a drive for internal coherence measured by
structural balance of concept triads. The package reproduces the emergence
of group stereotypes, opinion polarization, and affective polarization from
these two mechanisms, and ships a CLI for trajectories, parameter sweeps,
and validation oracles.
"""

from .belief_net import BeliefNetwork, iter_triads, triad_count
from .dynamics import (DynamicsParams, StepTrace, apply_trace, coherence_update,
                       select_interaction, simulation_step, social_update,
                       two_step_walk_distribution)
from .errors import ConfigError
from .experiment import (SimConfig, SweepConfig, SweepResult, cell_seed,
                         run_cell, run_simulation, run_sweep)
from .metrics import (HistogramSet, MetricsSeries, affective_polarization,
                      affective_polarization_with_counts, mean_dissonance,
                      opinion_polarization, snapshot_histograms)
from .population import (GROUP_A, GROUP_B, LATTE, Agent, Population, SocialGraph,
                         agent_entity, generate_social_graph, init_agents,
                         translate_concept, transmittable_beliefs)
from .rng import RandomStream, derive_seed

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "BeliefNetwork",
    "ConfigError",
    "DynamicsParams",
    "GROUP_A",
    "GROUP_B",
    "HistogramSet",
    "LATTE",
    "MetricsSeries",
    "Population",
    "RandomStream",
    "SimConfig",
    "SocialGraph",
    "StepTrace",
    "SweepConfig",
    "SweepResult",
    "agent_entity",
    "affective_polarization",
    "affective_polarization_with_counts",
    "apply_trace",
    "cell_seed",
    "coherence_update",
    "derive_seed",
    "generate_social_graph",
    "init_agents",
    "iter_triads",
    "mean_dissonance",
    "opinion_polarization",
    "run_cell",
    "run_simulation",
    "run_sweep",
    "select_interaction",
    "simulation_step",
    "snapshot_histograms",
    "social_update",
    "translate_concept",
    "transmittable_beliefs",
    "triad_count",
    "two_step_walk_distribution",
    "__version__",
]
