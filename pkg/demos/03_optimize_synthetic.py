"""End-to-end budget search on the bundled synthetic task.

Optimizes 32 layer budgets toward a mean of 128 tokens, pins the result back
to the target by proportional completion, and compares against the uniform
and pyramidal heuristics and the exact greedy optimum. Writes the run log to
trajectory.csv next to this script (render it with plot_trajectory.py).
"""

from pathlib import Path

from evolkv import (
    FitnessConfig,
    SaturatingTaskModel,
    SearchConfig,
    SyntheticEvaluator,
    complete,
    optimize,
    pyramidal_allocation,
    uniform_allocation,
    water_filling_optimum,
    write_trajectory_csv,
)

model = SaturatingTaskModel.bundled()
evaluator = SyntheticEvaluator(model)
target = 128

result = optimize(
    evaluator,
    FitnessConfig(target_budget=target),
    SearchConfig(rng_seed=42),
    layer_count=32,
)
print(f"search used {result.evaluations_used} evaluations")
print(f"as-searched mean budget: {result.best_budgets.mean():.1f}")

pinned = complete(result.best_budgets, target)
print(f"completed mean budget:   {pinned.mean():.2f}")
print(f"learned budgets: {pinned.budgets}")

oracle_alloc, oracle = water_filling_optimum(model, target * 32)
rows = [
    ("uniform", evaluator.evaluate(uniform_allocation(32, target))),
    ("pyramid (taper 0.2)", evaluator.evaluate(pyramidal_allocation(32, target, 0.2))),
    ("learned (completed)", evaluator.evaluate(pinned)),
    ("greedy optimum", oracle),
]
print("\nscores at mean budget 128:")
for name, score in rows:
    print(f"  {name:20s} {score:.4f}  ({score / oracle:6.1%} of optimum)")

out = Path(__file__).resolve().parent / "trajectory.csv"
write_trajectory_csv(result.trajectory, out)
print(f"\nwrote {out}")
