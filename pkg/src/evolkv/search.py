"""Group-wise evolutionary search over layer budgets.

One bottom-up sweep: budgets start uniform at the target, layers are split
into contiguous groups, and each group in turn is optimized by CMA-ES while
every other layer keeps the incumbent's budget. Candidates are decoded to
integer budgets, scored on the full scheme, shaped by the efficiency
multiplier, and the incumbent is replaced only on strict improvement.

Scores are memoized on the full integer budget vector: the sampler revisits
near-identical schemes constantly, and deterministic scorers make the cache
exact. The incumbent's own score is evaluated once up front so the best-so-far
trace starts from the uniform scheme rather than from the first sample.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .budgets import FitnessConfig, LayerBudgets, SearchConfig, partition_layers
from .cmaes import CmaEs
from .evaluators import EvaluationError, Evaluator
from .fitness import shaped_fitness

# group_index of the incumbent-seeding entry in a trajectory (not a search group)
BASELINE_GROUP = -1


@dataclass(frozen=True)
class TrajectoryPoint:
    """One scored scheme in evaluation order, with the running incumbent value."""

    group_index: int
    generation: int
    evaluation_index: int
    mean_budget: float
    raw_score: float
    shaped_fitness: float
    best_so_far: float


@dataclass(frozen=True)
class OptimizationResult:
    best_budgets: LayerBudgets
    best_fitness: float
    best_raw_score: float
    trajectory: Tuple[TrajectoryPoint, ...]
    evaluations_used: int


def encode_group(
    budgets_for_group: Sequence[int], lower: int, upper: int
) -> np.ndarray:
    """Affine map of integer budgets in [lower, upper] onto [0, 1] coordinates."""
    if lower >= upper:
        raise ValueError(f"need lower < upper, got [{lower}, {upper}]")
    k = np.asarray(budgets_for_group, dtype=float)
    if np.any(k < lower) or np.any(k > upper):
        raise ValueError(f"budgets {budgets_for_group} outside [{lower}, {upper}]")
    return (k - lower) / (upper - lower)


def decode_group(x: Sequence[float], lower: int, upper: int) -> Tuple[int, ...]:
    """Inverse of :func:`encode_group`: round half-up to integers in [lower, upper]."""
    v = lower + np.asarray(x, dtype=float) * (upper - lower)
    k = np.floor(v + 0.5).astype(int)
    return tuple(int(b) for b in np.clip(k, lower, upper))


def write_trajectory_csv(
    trajectory: Sequence[TrajectoryPoint], path: Union[str, Path]
) -> None:
    """Write the run log: one row per evaluation, stable column order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "group_index",
                "generation",
                "evaluation_index",
                "mean_budget",
                "raw_score",
                "shaped_fitness",
                "best_so_far",
            ]
        )
        for p in trajectory:
            writer.writerow(
                [
                    p.group_index,
                    p.generation,
                    p.evaluation_index,
                    repr(p.mean_budget),
                    repr(p.raw_score),
                    repr(p.shaped_fitness),
                    repr(p.best_so_far),
                ]
            )


class _MemoizedScorer:
    """Score cache keyed on the integer budget vector, with failure context."""

    def __init__(self, evaluator: Evaluator, jobs: int):
        self.evaluator = evaluator
        self.cache: Dict[Tuple[int, ...], float] = {}
        self.workers = max(1, min(jobs, evaluator.max_concurrency))

    def _call(self, budgets: LayerBudgets, group: int, generation: int) -> float:
        try:
            score = self.evaluator.evaluate(budgets)
        except EvaluationError as exc:
            raise EvaluationError(
                f"evaluation failed in group {group}, generation {generation}: {exc}",
                payload=exc.payload,
                group_index=group,
                generation=generation,
            ) from exc
        except Exception as exc:
            raise EvaluationError(
                f"evaluation failed in group {group}, generation {generation}: {exc}",
                group_index=group,
                generation=generation,
            ) from exc
        if not np.isfinite(score):
            raise EvaluationError(
                f"non-finite score {score!r} in group {group}, generation {generation}",
                group_index=group,
                generation=generation,
            )
        return float(score)

    def score_one(self, budgets: LayerBudgets, group: int, generation: int) -> float:
        key = budgets.budgets
        if key not in self.cache:
            self.cache[key] = self._call(budgets, group, generation)
        return self.cache[key]

    def score_batch(
        self, schemes: Sequence[LayerBudgets], group: int, generation: int
    ) -> List[float]:
        """Scores in input order; duplicate schemes are evaluated once."""
        if self.workers == 1:
            return [self.score_one(s, group, generation) for s in schemes]
        unique_keys = dict.fromkeys(s.budgets for s in schemes)
        fresh = [key for key in unique_keys if key not in self.cache]
        layer_count = schemes[0].layer_count
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = {
                key: pool.submit(
                    self._call, LayerBudgets(key, layer_count), group, generation
                )
                for key in fresh
            }
            for key, future in futures.items():
                self.cache[key] = future.result()
        return [self.cache[s.budgets] for s in schemes]


def optimize(
    evaluator: Evaluator,
    fitness_config: FitnessConfig,
    search_config: SearchConfig,
    layer_count: int,
    jobs: int = 1,
) -> OptimizationResult:
    """Run the full bottom-up group sweep and return the incumbent scheme.

    ``jobs`` caps concurrent scorer calls per generation; the effective degree
    is also limited by the scorer's own declared concurrency. The result is
    deterministic for a fixed seed and deterministic scorer regardless of
    ``jobs``.
    """
    if layer_count < 1:
        raise ValueError(f"layer_count must be >= 1, got {layer_count}")
    if evaluator.layer_count != layer_count:
        raise ValueError(
            f"evaluator scores {evaluator.layer_count} layers, run asks for {layer_count}"
        )
    search_config.validate_against(fitness_config)
    lower = search_config.budget_lower_bound
    upper = search_config.resolved_upper_bound(fitness_config.target_budget)
    if lower >= upper:
        raise ValueError(f"need budget_lower_bound < upper bound, got [{lower}, {upper}]")

    partition = partition_layers(layer_count, search_config.group_size)
    population = search_config.resolved_population_size()
    generations = search_config.max_iterations_per_group
    scorer = _MemoizedScorer(evaluator, jobs)
    group_seeds = np.random.SeedSequence(search_config.rng_seed).spawn(
        partition.group_count
    )

    incumbent = LayerBudgets(
        (fitness_config.target_budget,) * layer_count, layer_count
    )
    baseline_raw = scorer.score_one(incumbent, BASELINE_GROUP, 0)
    baseline = shaped_fitness(baseline_raw, incumbent, fitness_config)
    best_value = baseline.shaped_value
    best_raw = baseline.raw_score

    trajectory: List[TrajectoryPoint] = [
        TrajectoryPoint(
            group_index=BASELINE_GROUP,
            generation=0,
            evaluation_index=0,
            mean_budget=baseline.mean_budget,
            raw_score=baseline.raw_score,
            shaped_fitness=baseline.shaped_value,
            best_so_far=best_value,
        )
    ]
    evaluation_index = 0
    evaluations_used = 0

    for group_index, (start, end) in enumerate(partition.groups):
        strategy = CmaEs(
            dimension=end - start,
            initial_mean=encode_group(incumbent.budgets[start:end], lower, upper),
            sigma=search_config.sigma,
            population_size=population,
            seed=group_seeds[group_index],
        )
        for generation in range(generations):
            candidates = strategy.ask()
            schemes = [
                incumbent.replace_slice(start, decode_group(c.clipped, lower, upper))
                for c in candidates
            ]
            raw_scores = scorer.score_batch(schemes, group_index, generation)

            evaluated = []
            for candidate, scheme, raw in zip(candidates, schemes, raw_scores):
                result = shaped_fitness(raw, scheme, fitness_config)
                evaluation_index += 1
                evaluations_used += 1
                if result.shaped_value > best_value:  # strict: ties keep the incumbent
                    best_value = result.shaped_value
                    best_raw = result.raw_score
                    incumbent = scheme
                trajectory.append(
                    TrajectoryPoint(
                        group_index=group_index,
                        generation=generation,
                        evaluation_index=evaluation_index,
                        mean_budget=result.mean_budget,
                        raw_score=result.raw_score,
                        shaped_fitness=result.shaped_value,
                        best_so_far=best_value,
                    )
                )
                evaluated.append(candidate.with_fitness(result.shaped_value))
            strategy.tell(evaluated)

    return OptimizationResult(
        best_budgets=incumbent,
        best_fitness=best_value,
        best_raw_score=best_raw,
        trajectory=tuple(trajectory),
        evaluations_used=evaluations_used,
    )
