"""Simulation and exact analysis of memory/probability-bounded grid search.

Agents are probabilistic finite automata with move-labeled states searching
the integer lattice for a target within max-norm distance D.  The package
builds the standard machines, simulates swarms reproducibly, and analyzes
the underlying Markov chains with exact rational arithmetic.
"""

from .automaton import (
    ACTION_DELTA,
    Action,
    Automaton,
    ChiMetric,
    MOVE_ACTIONS,
    SizeBudgetExceeded,
    chi,
    from_json,
    make_automaton,
    min_probability,
    resolution_exponent,
    step_distribution,
    to_json,
    validate,
)
from .algorithms import (
    UniformProgram,
    boost_exponent,
    build_from_spec,
    coin_automaton,
    compile_uniform,
    covering_phase,
    expected_iteration_moves,
    hit_probability_per_iteration,
    search_automaton,
    search_visit_probability,
    walk_automaton,
    walk_length_pmf,
)
from .chain_analysis import (
    analyze_report,
    chernoff_lower,
    chernoff_twosided,
    chernoff_upper,
    coverage_mask,
    decompose,
    drift_profile,
    inf_norm_distance,
    minorization_bound,
    mixing_certificate,
    predict_coverage,
    reach_bound,
    recurrence_arrival_check,
    rosenthal_bound,
    stationary,
    tv_distance,
)
from .grid_sim import AgentRun, SwarmResult, TargetSpec, run_agent, run_swarm
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    coverage_experiment,
    fit_scaling_exponent,
    run_experiment,
    speedup,
    uniform_monotonicity_check,
    verification_suite,
)

__version__ = "0.1.0"

__all__ = [
    "ACTION_DELTA",
    "Action",
    "AgentRun",
    "Automaton",
    "ChiMetric",
    "ExperimentConfig",
    "ExperimentResult",
    "MOVE_ACTIONS",
    "SizeBudgetExceeded",
    "SwarmResult",
    "TargetSpec",
    "UniformProgram",
    "analyze_report",
    "boost_exponent",
    "build_from_spec",
    "chernoff_lower",
    "chernoff_twosided",
    "chernoff_upper",
    "chi",
    "coin_automaton",
    "compile_uniform",
    "coverage_experiment",
    "coverage_mask",
    "covering_phase",
    "decompose",
    "drift_profile",
    "expected_iteration_moves",
    "fit_scaling_exponent",
    "from_json",
    "hit_probability_per_iteration",
    "inf_norm_distance",
    "make_automaton",
    "min_probability",
    "minorization_bound",
    "mixing_certificate",
    "predict_coverage",
    "reach_bound",
    "recurrence_arrival_check",
    "resolution_exponent",
    "rosenthal_bound",
    "run_agent",
    "run_experiment",
    "run_swarm",
    "search_automaton",
    "search_visit_probability",
    "speedup",
    "stationary",
    "step_distribution",
    "to_json",
    "tv_distance",
    "uniform_monotonicity_check",
    "validate",
    "verification_suite",
    "walk_automaton",
    "walk_length_pmf",
]
