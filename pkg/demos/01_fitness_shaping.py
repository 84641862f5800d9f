"""How the efficiency multiplier shapes a raw task score.

The multiplier is a piecewise-linear function of the scheme's mean budget:
worth 1.0 exactly on target, discounted gently below target (controlled by
gamma), and falling to zero at twice the target. Multiplying the raw score by
(1 + lambda * multiplier) makes "good and on budget" beat "slightly better
but bloated".
"""

import numpy as np

from evolkv import FitnessConfig, LayerBudgets, cache_score, shaped_fitness

config = FitnessConfig(target_budget=128, lam=0.3, gamma=0.2)

print("mean budget -> efficiency multiplier (target 128, gamma 0.2)")
for mean in (0, 32, 64, 96, 128, 160, 192, 256, 320):
    print(f"  {mean:4d} -> {cache_score(mean, config):.4f}")

print("\nsame raw score 0.80 under different schemes (lambda 0.3):")
for budgets in ([128] * 32, [64] * 32, [200] * 32, [256] * 32):
    result = shaped_fitness(0.80, LayerBudgets.of(budgets), config)
    print(
        f"  mean {result.mean_budget:6.1f}: shaped {result.shaped_value:.4f} "
        f"(multiplier {1 + config.lam * result.cache_score:.4f})"
    )

print("\nthe shaped objective peaks exactly on target for a fixed raw score:")
means = np.arange(1, 385)
values = [
    shaped_fitness(1.0, LayerBudgets.of([m] * 4), config).shaped_value for m in means
]
print(f"  argmax over mean budgets 1..384 = {means[int(np.argmax(values))]}")
