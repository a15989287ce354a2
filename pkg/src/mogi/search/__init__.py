"""Multi-objective search over patches (NSGA-II, NSGA-III, SPEA2) and a
single-objective hill-climbing baseline."""

from .algorithms import (
    SearchContext, das_dennis, final_front, hill_climb, nsga2_step, nsga3_step,
    rank_fronts, spea2_fitness, spea2_select, spea2_step,
)
from .core import (
    ALGORITHMS, OBJECTIVE_FIELDS, Evaluator, Individual, RunRecord, SearchConfig,
    SearchError, evaluate_patch, summarize,
)
from .pareto import crowding_distance, dominates, fast_nondominated_sort
from .run import run_search

__all__ = [
    "ALGORITHMS", "OBJECTIVE_FIELDS", "Evaluator", "Individual", "RunRecord", "SearchConfig",
    "SearchContext", "SearchError", "crowding_distance", "das_dennis", "dominates",
    "evaluate_patch", "fast_nondominated_sort", "final_front", "hill_climb", "nsga2_step",
    "nsga3_step", "rank_fronts", "run_search", "spea2_fitness", "spea2_select", "spea2_step",
    "summarize",
]
