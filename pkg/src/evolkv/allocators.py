"""Heuristic baseline allocation shapes: uniform, pyramidal, fixed-position.

These are the comparison points for optimized allocations. All three hit the
requested mean budget exactly; the pyramid is a linear taper parameterized by
the bottom-to-top ratio (the published pyramid schedules define their own
attenuation, which is not reproduced here).
"""

from __future__ import annotations

import math
from typing import Tuple

from .budgets import LayerBudgets, PositionPolicy


def uniform_allocation(layer_count: int, target_average: int) -> LayerBudgets:
    """Every layer gets exactly the target budget."""
    if layer_count < 1 or target_average < 1:
        raise ValueError("layer_count and target_average must be >= 1")
    return LayerBudgets((target_average,) * layer_count, layer_count)


def pyramidal_allocation(
    layer_count: int, target_average: int, taper_ratio: float = 0.2
) -> LayerBudgets:
    """Linearly decreasing budgets from layer 0 down to ``taper_ratio`` of the top.

    The ramp is scaled so the total equals ``target_average * layer_count``
    exactly; the integer rounding residue lands on the bottom (largest) layer,
    spread down the leading plateau when it would break monotonicity.
    """
    if layer_count < 1 or target_average < 1:
        raise ValueError("layer_count and target_average must be >= 1")
    if not (0 < taper_ratio <= 1):
        raise ValueError(f"taper_ratio must be in (0, 1], got {taper_ratio}")
    if layer_count == 1 or taper_ratio == 1:
        return uniform_allocation(layer_count, target_average)

    total = target_average * layer_count
    # Ramp coefficients 1 -> taper_ratio; k_max chosen so the real-valued sum is total.
    coef = [
        1.0 - (1.0 - taper_ratio) * i / (layer_count - 1) for i in range(layer_count)
    ]
    k_max = total / sum(coef)
    ramp = [math.floor(c * k_max + 0.5) for c in coef]  # round half-up, stays sorted

    residue = total - sum(ramp)
    if residue > 0:
        ramp[0] += residue
    while residue < 0:
        # Take one token from the end of the leading plateau to keep the ramp sorted.
        peak = ramp[0]
        idx = 0
        while idx + 1 < layer_count and ramp[idx + 1] == peak:
            idx += 1
        ramp[idx] -= 1
        residue += 1
    return LayerBudgets(tuple(ramp), layer_count)


def fixed_position_allocation(
    layer_count: int, target_average: int, sink_tokens: int
) -> Tuple[LayerBudgets, PositionPolicy]:
    """Uniform budgets retaining the first ``sink_tokens`` plus the most recent positions.

    The position rule is carried as metadata; only position-aware evaluators
    act on it.
    """
    if layer_count < 1 or target_average < 1:
        raise ValueError("layer_count and target_average must be >= 1")
    if sink_tokens < 0:
        raise ValueError(f"sink_tokens must be >= 0, got {sink_tokens}")
    if sink_tokens >= target_average:
        raise ValueError(
            f"sink_tokens {sink_tokens} leaves no recency capacity "
            f"within budget {target_average}"
        )
    budgets = LayerBudgets((target_average,) * layer_count, layer_count)
    return budgets, PositionPolicy(kind="fixed_position", sink_tokens=sink_tokens)
