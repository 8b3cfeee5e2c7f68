"""Context-aware user/small-cell association in two-tier cellular networks."""

from cellmatch.baseline import max_sinr_assignment
from cellmatch.harness import MetricsRecord, emit_csv, run_experiment, summarize_gain
from cellmatch.matching import (Matching, Outcome, PreferenceProfile, SolveResult, build_preferences,
                                deferred_acceptance, is_stable, solve)
from cellmatch.scenario import Config, Scenario, generate_scenario, load_config

__all__ = [
    "Config", "Scenario", "generate_scenario", "load_config",
    "Matching", "Outcome", "PreferenceProfile", "SolveResult", "build_preferences",
    "deferred_acceptance", "is_stable", "solve",
    "max_sinr_assignment",
    "MetricsRecord", "emit_csv", "run_experiment", "summarize_gain",
]
