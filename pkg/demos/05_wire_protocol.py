"""Driving an out-of-process scorer over the line-delimited JSON protocol.

Real scorers (model inference, benchmark harnesses) run as subprocesses and
exchange one JSON object per line: a hello with their metadata, then
evaluate/result pairs correlated by id, then a shutdown. The bundled mock
scorer answers with mean(budgets)/1000, which is enough to show the plumbing
end to end, including how the optimizer reports a scorer crash.
"""

import sys

from evolkv import (
    EvaluationError,
    FitnessConfig,
    LayerBudgets,
    SearchConfig,
    SubprocessEvaluator,
    optimize,
)

mock = f'"{sys.executable}" -m evolkv.mock_evaluator --layers 8'

with SubprocessEvaluator(mock) as scorer:
    print(f"hello: {scorer.layer_count} layers, metric {scorer.metric_name!r}, "
          f"max concurrency {scorer.max_concurrency}")
    score = scorer.evaluate(LayerBudgets.of([128] * 8))
    print(f"uniform 128 scores {score}")

    result = optimize(
        scorer,
        FitnessConfig(target_budget=64),
        SearchConfig(group_size=4, max_iterations_per_group=3, rng_seed=0),
        layer_count=8,
    )
    print(f"optimize over the wire: {result.evaluations_used} evaluations, "
          f"best raw {result.best_raw_score:.4f}")

print("\nnow with a scorer that dies mid-run:")
crashing = SubprocessEvaluator(mock + " --die-after 10")
try:
    optimize(
        crashing,
        FitnessConfig(target_budget=64),
        SearchConfig(group_size=4, max_iterations_per_group=3, rng_seed=0),
        layer_count=8,
    )
except EvaluationError as exc:
    print(f"caught: {exc}")
    print(f"located at group {exc.group_index}, generation {exc.generation}")
finally:
    crashing.close(force=True)
