"""Core value types: per-layer budget vectors, layer groupings, run configuration.

Everything here is an immutable value object; instances can be shared freely
between threads. The canonical on-disk form of a budget vector is a JSON
document ``{"layer_count": L, "budgets": [k_1, ..., k_L]}``, optionally
extended with a ``"policy"`` object for position-based retention strategies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union


@dataclass(frozen=True)
class LayerBudgets:
    """An integer KV cache budget (retained token positions) per layer."""

    budgets: Tuple[int, ...]
    layer_count: int

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if self.layer_count < 1:
            raise ValueError(f"layer_count must be >= 1, got {self.layer_count}")
        if len(self.budgets) != self.layer_count:
            raise ValueError(
                f"budget vector has {len(self.budgets)} entries "
                f"for layer_count {self.layer_count}"
            )
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be non-negative")

    @classmethod
    def of(cls, budgets: Sequence[int]) -> "LayerBudgets":
        return cls(tuple(int(b) for b in budgets), len(budgets))

    def total(self) -> int:
        return sum(self.budgets)

    def mean(self) -> float:
        return self.total() / self.layer_count

    def replace_slice(self, start: int, values: Sequence[int]) -> "LayerBudgets":
        """A copy with ``budgets[start:start+len(values)]`` replaced."""
        new = list(self.budgets)
        new[start : start + len(values)] = [int(v) for v in values]
        return LayerBudgets(tuple(new), self.layer_count)

    def to_json_dict(self) -> dict:
        return {"layer_count": self.layer_count, "budgets": list(self.budgets)}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "LayerBudgets":
        try:
            return cls(tuple(int(b) for b in doc["budgets"]), int(doc["layer_count"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed budget document: {exc}") from exc


@dataclass(frozen=True)
class PositionPolicy:
    """Retention-position metadata attached to a budget file.

    Only position-aware consumers (external scorers) act on it; the optimizer
    treats budgets as pure counts.
    """

    kind: str
    sink_tokens: int = 0

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "sink_tokens": self.sink_tokens}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PositionPolicy":
        return cls(kind=str(doc["kind"]), sink_tokens=int(doc.get("sink_tokens", 0)))


def write_budget_file(
    path: Union[str, Path],
    budgets: LayerBudgets,
    policy: Optional[PositionPolicy] = None,
) -> None:
    """Write the canonical budget JSON document (stable key order, trailing newline)."""
    doc = budgets.to_json_dict()
    if policy is not None:
        doc["policy"] = policy.to_json_dict()
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_budget_file(
    path: Union[str, Path],
) -> Tuple[LayerBudgets, Optional[PositionPolicy]]:
    doc = json.loads(Path(path).read_text())
    budgets = LayerBudgets.from_json_dict(doc)
    policy = PositionPolicy.from_json_dict(doc["policy"]) if "policy" in doc else None
    return budgets, policy


@dataclass(frozen=True)
class GroupPartition:
    """Contiguous partition of layers into groups of ``group_size`` (last may be short)."""

    group_size: int
    groups: Tuple[Tuple[int, int], ...]  # half-open (start, end) layer ranges

    @property
    def group_count(self) -> int:
        return len(self.groups)

    def layer_count(self) -> int:
        return self.groups[-1][1] if self.groups else 0


def partition_layers(layer_count: int, group_size: int) -> GroupPartition:
    """Split ``[0, layer_count)`` into ceil(layer_count/group_size) contiguous groups."""
    if layer_count < 1:
        raise ValueError(f"layer_count must be >= 1, got {layer_count}")
    if group_size < 1:
        raise ValueError(f"group_size must be >= 1, got {group_size}")
    groups = tuple(
        (start, min(start + group_size, layer_count))
        for start in range(0, layer_count, group_size)
    )
    return GroupPartition(group_size=group_size, groups=groups)


def population_size_for(group_size: int) -> int:
    """Default evolution-strategy population for a group of the given width.

    4 + floor(3 ln n) grows slowly with dimension; widths 2/4/8/16/32 map to
    populations 6/8/10/12/14.
    """
    if group_size < 1:
        raise ValueError(f"group_size must be >= 1, got {group_size}")
    return 4 + math.floor(3.0 * math.log(group_size))


@dataclass(frozen=True)
class FitnessConfig:
    """Parameters of the shaped objective: target mean budget plus shaping weights."""

    target_budget: int
    lam: float = 0.3  # weight of the efficiency multiplier
    gamma: float = 0.2  # smoothing of the under-budget discount, in (0, 1]

    def __post_init__(self):
        if self.target_budget < 1:
            raise ValueError(f"target_budget must be >= 1, got {self.target_budget}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not (0 < self.gamma <= 1):
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the group-wise evolutionary search loop."""

    group_size: int = 8
    max_iterations_per_group: int = 50
    sigma: float = 0.3  # initial step size in normalized [0, 1] coordinates
    population_size: Optional[int] = None  # None -> population_size_for(group_size)
    budget_lower_bound: int = 1
    budget_upper_bound: Optional[int] = None  # None -> 4 * target_budget
    rng_seed: int = 0

    def __post_init__(self):
        if self.group_size < 1:
            raise ValueError(f"group_size must be >= 1, got {self.group_size}")
        if self.max_iterations_per_group < 1:
            raise ValueError("max_iterations_per_group must be >= 1")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.population_size is not None and self.population_size < 2:
            raise ValueError("population_size override must be >= 2")
        if self.budget_lower_bound < 0:
            raise ValueError("budget_lower_bound must be >= 0")

    def resolved_upper_bound(self, target_budget: int) -> int:
        return (
            self.budget_upper_bound
            if self.budget_upper_bound is not None
            else 4 * target_budget
        )

    def resolved_population_size(self) -> int:
        return (
            self.population_size
            if self.population_size is not None
            else population_size_for(self.group_size)
        )

    def validate_against(self, fitness: FitnessConfig) -> None:
        upper = self.resolved_upper_bound(fitness.target_budget)
        if not (self.budget_lower_bound <= fitness.target_budget <= upper):
            raise ValueError(
                f"target_budget {fitness.target_budget} outside "
                f"[{self.budget_lower_bound}, {upper}]"
            )
