"""Re-targeting an optimized allocation without re-running the search.

Proportional completion rescales a budget vector to a new average while
preserving each layer's share. Budgets found under a tight target transfer
surprisingly well: here the 128-token result expanded to 512 matches (and
slightly beats) a fresh search run directly at 512.
"""

from evolkv import (
    FitnessConfig,
    SaturatingTaskModel,
    SearchConfig,
    SyntheticEvaluator,
    complete,
    optimize,
)

model = SaturatingTaskModel.bundled()
evaluator = SyntheticEvaluator(model)

low = optimize(
    evaluator, FitnessConfig(target_budget=128), SearchConfig(rng_seed=1), 32
)
print(f"optimized at 128: mean {low.best_budgets.mean():.1f}, "
      f"raw score {low.best_raw_score:.4f}")

print("\nexpanding the 128-token result to larger targets:")
for target in (256, 512, 1024):
    expanded = complete(low.best_budgets, target)
    print(f"  target {target:5d}: mean {expanded.mean():8.2f}  "
          f"score {evaluator.evaluate(expanded):.4f}")

high = optimize(
    evaluator, FitnessConfig(target_budget=512), SearchConfig(rng_seed=1), 32
)
direct = evaluator.evaluate(complete(high.best_budgets, 512))
expanded_512 = evaluator.evaluate(complete(low.best_budgets, 512))
print(f"\nexpanded-from-128 at 512: {expanded_512:.4f}")
print(f"directly optimized at 512: {direct:.4f}")
print(f"expansion / direct = {expanded_512 / direct:.3f}")
