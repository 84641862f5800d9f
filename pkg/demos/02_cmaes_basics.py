"""The ask/tell loop of the evolution strategy on a toy landscape.

Ask for a population sampled from the current search distribution, score each
candidate, tell the strategy the results; it moves its mean, reshapes its
covariance, and adapts its step size. Here it maximizes a quadratic bowl
centered at 0.7 inside the unit box.
"""

import numpy as np

from evolkv import CmaEs


def bowl(x):
    return -float(np.sum((x - 0.7) ** 2))


es = CmaEs(dimension=8, initial_mean=[0.5] * 8, sigma=0.3, population_size=10, seed=42)

best = -np.inf
for generation in range(120):
    candidates = es.ask()
    evaluated = [c.with_fitness(bowl(c.clipped)) for c in candidates]
    es.tell(evaluated)
    best = max(best, max(c.fitness for c in evaluated))
    if generation % 20 == 0 or generation == 119:
        print(
            f"gen {generation:3d}: best {best:.3e}  "
            f"step size {es.sigma:.3e}  mean[0] {es.mean[0]:.4f}"
        )

print(f"\ndistance of final mean from the optimum: {np.abs(es.mean - 0.7).max():.2e}")
