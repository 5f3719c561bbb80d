"""Cellular-automaton laboratory for distributed majority consensus.

The package splits into rule definitions (rules, grid2d, graphca), running
regimes (stochastic for noise, async, and block updates), exact finite-size
analysis (analysis), branching over update choices (multiway), rule-space
search (search), and a batch CLI (cli).
"""

from .analysis import (ClassificationReport, TransitionGraph,
                       adversarial_flip_search, build_stg, classify_states,
                       consensus_time_stats, no_perfect_rule_check,
                       trajectory_outcome)
from .graphca import (NodeGraph, ShellRule, complete_graph, geodesic_shells,
                      gnm_graph, graph_stg, graph_success_rate, lattice_graph,
                      regular_graph, ring_graph, run_graph, step_graph)
from .grid2d import (GKL2D, SampledMajority2D, Totalistic2D, evolve2d, gkl2d,
                     majority_code, sampled_majority2d, settle2d, step2d,
                     totalistic2d)
from .multiway import (CausalGraph, MultiwayGraph, causal_graph,
                       multiway_async_block, multiway_async_ca, multiway_noise)
from .rules import (GKL_OFFSETS, Rule1D, density, elementary_rule, evolve,
                    exact_density_config, gkl_rule, is_uniform, majority_value,
                    radius_rule, random_config, run_until_uniform,
                    sampled_majority, step_sync)
from .search import (ScoreSpec, SearchResult, sample_rule_numbers, score_rule,
                     search_rules)
from .seeding import rng_for
from .stochastic import (BlockRule, Schedule, evolve_async, evolve_block_async,
                         evolve_noisy, final_density_curve, phase_diagram,
                         run_block_async, sorting_rule)

__version__ = "0.1.0"

__all__ = [
    "BlockRule", "CausalGraph", "ClassificationReport", "GKL2D",
    "GKL_OFFSETS", "MultiwayGraph", "NodeGraph", "Rule1D",
    "SampledMajority2D", "Schedule", "ScoreSpec", "SearchResult",
    "ShellRule", "Totalistic2D", "TransitionGraph",
    "adversarial_flip_search", "build_stg", "causal_graph",
    "classify_states", "complete_graph", "consensus_time_stats", "density",
    "elementary_rule", "evolve", "evolve2d", "evolve_async",
    "evolve_block_async", "evolve_noisy", "exact_density_config",
    "final_density_curve", "geodesic_shells", "gkl2d", "gkl_rule",
    "gnm_graph", "graph_stg", "graph_success_rate", "is_uniform",
    "lattice_graph", "majority_code", "majority_value",
    "multiway_async_block", "multiway_async_ca", "multiway_noise",
    "no_perfect_rule_check", "phase_diagram", "radius_rule", "random_config",
    "regular_graph", "ring_graph", "rng_for", "run_block_async", "run_graph",
    "run_until_uniform", "sample_rule_numbers", "sampled_majority",
    "sampled_majority2d", "score_rule", "search_rules", "settle2d",
    "sorting_rule", "step2d", "step_graph", "step_sync", "totalistic2d",
    "trajectory_outcome",
]
