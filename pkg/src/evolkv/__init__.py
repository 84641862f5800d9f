"""Task-driven evolutionary search over per-layer KV cache budgets.

The library optimizes an integer budget vector (retained token positions per
transformer layer) against any black-box task scorer: budgets are grouped
into contiguous layer blocks, each block is searched by CMA-ES in turn, and
candidate schemes are rewarded both for raw task score and for staying at or
under a target mean budget. Optimized vectors can be proportionally re-scaled
to other targets without re-running the search.
"""

from .allocators import (
    fixed_position_allocation,
    pyramidal_allocation,
    uniform_allocation,
)
from .budgets import (
    FitnessConfig,
    GroupPartition,
    LayerBudgets,
    PositionPolicy,
    SearchConfig,
    partition_layers,
    population_size_for,
    read_budget_file,
    write_budget_file,
)
from .cmaes import Candidate, CmaEs
from .completion import complete
from .evaluators import (
    EvaluationError,
    Evaluator,
    SaturatingTaskModel,
    SubprocessEvaluator,
    SyntheticEvaluator,
    synthetic_evaluate,
    water_filling_optimum,
)
from .fitness import ShapedFitness, cache_score, shaped_fitness
from .search import (
    OptimizationResult,
    TrajectoryPoint,
    decode_group,
    encode_group,
    optimize,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CmaEs",
    "EvaluationError",
    "Evaluator",
    "FitnessConfig",
    "GroupPartition",
    "LayerBudgets",
    "OptimizationResult",
    "PositionPolicy",
    "SaturatingTaskModel",
    "SearchConfig",
    "ShapedFitness",
    "SubprocessEvaluator",
    "SyntheticEvaluator",
    "TrajectoryPoint",
    "cache_score",
    "complete",
    "decode_group",
    "encode_group",
    "fixed_position_allocation",
    "optimize",
    "partition_layers",
    "population_size_for",
    "pyramidal_allocation",
    "read_budget_file",
    "shaped_fitness",
    "synthetic_evaluate",
    "uniform_allocation",
    "water_filling_optimum",
    "write_budget_file",
    "write_trajectory_csv",
    "__version__",
]
