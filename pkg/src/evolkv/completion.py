"""Proportional budget completion: re-target an allocation to a new average.

The gap between the achieved total A and the target total T = target * L is
redistributed across layers in proportion to each layer's share of A, then
each layer is rounded up:

    b_i = ceil(k_i + (k_i / A) * (T - A)) = ceil(k_i * T / A)

The ceiling makes the completed total land in [T, T + L); exact equality with
T is generally unattainable and the overshoot is documented rather than
trimmed. Down-scaling (T < A) uses the same map, rounding toward the target
from below.
"""

from __future__ import annotations

from .budgets import LayerBudgets


def complete(budgets: LayerBudgets, target_average: int) -> LayerBudgets:
    """Rescale ``budgets`` so the mean approaches ``target_average``, preserving ratios.

    Zero layers stay zero (they own no share of the total); relative order of
    layers is preserved. Raises if every layer is zero, since proportions are
    then undefined.
    """
    if target_average < 1:
        raise ValueError(f"target_average must be >= 1, got {target_average}")
    achieved = budgets.total()
    if achieved == 0:
        raise ValueError("cannot complete an all-zero budget vector")
    target_total = target_average * budgets.layer_count
    # ceil(k*T/A) in exact integer arithmetic; equals ceil(k + k/A * (T - A)).
    completed = tuple(-(-k * target_total // achieved) for k in budgets.budgets)
    return LayerBudgets(completed, budgets.layer_count)
