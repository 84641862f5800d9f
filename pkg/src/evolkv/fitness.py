"""Fitness shaping: the cache-efficiency multiplier and the shaped objective.

The efficiency term maps a scheme's mean per-layer budget into [0, 1]: schemes
over the target lose score linearly and hit zero at twice the target; schemes
under the target keep most of their value, discounted smoothly by ``gamma``.
The shaped objective multiplies the raw task score by ``1 + lam * efficiency``
so that, for any fixed positive raw score, staying exactly on target is optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

from .budgets import FitnessConfig, LayerBudgets


@dataclass(frozen=True)
class ShapedFitness:
    """One evaluated scheme: raw task score, efficiency term, and their product."""

    raw_score: float
    cache_score: float
    shaped_value: float
    mean_budget: float


def cache_score(mean_budget: float, config: FitnessConfig) -> float:
    """Efficiency multiplier in [0, 1] for a scheme with the given mean budget.

    Piecewise linear and continuous at the target: over-budget schemes fall off
    as ``max(0, 1 - (mean - c)/c)``; under-budget schemes earn
    ``1 - gamma * (1 - mean/c)``.
    """
    if mean_budget < 0:
        raise ValueError(f"mean_budget must be >= 0, got {mean_budget}")
    c = config.target_budget
    if mean_budget > c:
        return max(0.0, 1.0 - (mean_budget - c) / c)
    return 1.0 - config.gamma * (1.0 - mean_budget / c)


def shaped_fitness(
    raw_score: float, budgets: LayerBudgets, config: FitnessConfig
) -> ShapedFitness:
    """Combine a raw task score with the efficiency multiplier.

    Negative raw scores are clamped to zero before shaping: the multiplier is
    >= 1, so passing a negative score through would reward blowing the budget.
    The clamped value is the one recorded in the result.
    """
    raw = max(0.0, float(raw_score))
    mean = budgets.mean()
    cs = cache_score(mean, config)
    return ShapedFitness(
        raw_score=raw,
        cache_score=cs,
        shaped_value=raw * (1.0 + config.lam * cs),
        mean_budget=mean,
    )
