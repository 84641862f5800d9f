"""Covariance Matrix Adaptation Evolution Strategy over the unit box.

A compact (mu/mu_w, lambda) implementation with cumulative step-size
adaptation and rank-one plus rank-mu covariance updates, used as the
per-group search engine. The strategy MAXIMIZES the fitness handed to
``tell``. Search coordinates live in [0, 1]^d; samples are repaired by
coordinate-wise clipping and the clipped points feed every update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

# Covariance condition beyond which the sampler has degenerated and is reset.
_CONDITION_LIMIT = 1e14


@dataclass
class Candidate:
    """One sampled point: raw genome, its clip into the box, and its fitness."""

    genome: np.ndarray
    clipped: np.ndarray
    fitness: Optional[float] = None

    def with_fitness(self, fitness: float) -> "Candidate":
        return Candidate(self.genome, self.clipped, float(fitness))


class CmaEs:
    """Ask/tell evolution strategy state for one search of dimension ``d``.

    Strategy constants follow the standard published defaults derived from
    dimension and population size. Single-writer: call ``ask`` then ``tell``
    sequentially; candidates may be evaluated concurrently in between.
    """

    def __init__(
        self,
        dimension: int,
        initial_mean: Sequence[float],
        sigma: float,
        population_size: int,
        seed: int,
    ):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        if sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {sigma}")
        if population_size < 2:
            raise ValueError(
                f"population_size must be >= 2 for recombination, got {population_size}"
            )
        mean = np.asarray(initial_mean, dtype=float).copy()
        if mean.shape != (dimension,):
            raise ValueError(f"initial_mean must have shape ({dimension},)")
        if np.any(mean < 0) or np.any(mean > 1):
            raise ValueError("initial_mean components must lie in [0, 1]")

        self.dimension = dimension
        self.mean = mean
        self.sigma = float(sigma)
        self.population_size = population_size
        self.generation = 0
        self.rng = np.random.default_rng(seed)

        d = float(dimension)
        mu = population_size // 2
        raw = np.log((population_size + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        self.weights = raw / raw.sum()  # positive, sum to 1
        self.mu = mu
        self.mu_eff = 1.0 / float(np.sum(self.weights**2))

        self.c_sigma = (self.mu_eff + 2.0) / (d + self.mu_eff + 5.0)
        self.d_sigma = (
            1.0
            + 2.0 * max(0.0, math.sqrt((self.mu_eff - 1.0) / (d + 1.0)) - 1.0)
            + self.c_sigma
        )
        self.c_cov_path = (4.0 + self.mu_eff / d) / (d + 4.0 + 2.0 * self.mu_eff / d)
        self.c_rank_one = 2.0 / ((d + 1.3) ** 2 + self.mu_eff)
        self.c_rank_mu = min(
            1.0 - self.c_rank_one,
            2.0 * (self.mu_eff - 2.0 + 1.0 / self.mu_eff) / ((d + 2.0) ** 2 + self.mu_eff),
        )
        self.chi_n = math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))

        self.covariance = np.eye(dimension)
        self.path_sigma = np.zeros(dimension)
        self.path_cov = np.zeros(dimension)
        self._decompose()

    def _decompose(self) -> None:
        """Refresh the eigendecomposition used for sampling and C^(-1/2)."""
        self.covariance = (self.covariance + self.covariance.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(self.covariance)
        if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > _CONDITION_LIMIT:
            # Degenerate sampler: restart the shape, keep mean and step size.
            self.covariance = np.eye(self.dimension)
            eigvals = np.ones(self.dimension)
            eigvecs = np.eye(self.dimension)
        self._eig_vals = eigvals
        self._eig_vecs = eigvecs
        self._sqrt_scale = np.sqrt(eigvals)
        self._inv_sqrt = eigvecs @ np.diag(1.0 / self._sqrt_scale) @ eigvecs.T

    def ask(self) -> List[Candidate]:
        """Sample ``population_size`` candidates from mean + sigma * N(0, C)."""
        out = []
        for _ in range(self.population_size):
            z = self.rng.standard_normal(self.dimension)
            genome = self.mean + self.sigma * (self._eig_vecs @ (self._sqrt_scale * z))
            out.append(Candidate(genome=genome, clipped=np.clip(genome, 0.0, 1.0)))
        return out

    def tell(self, evaluated: Sequence[Candidate]) -> None:
        """Rank candidates by fitness (descending) and update the strategy state."""
        if len(evaluated) != self.population_size:
            raise ValueError(
                f"expected {self.population_size} candidates, got {len(evaluated)}"
            )
        fitnesses = []
        for cand in evaluated:
            if cand.fitness is None or not math.isfinite(cand.fitness):
                raise ValueError(f"candidate fitness missing or non-finite: {cand.fitness}")
            fitnesses.append(cand.fitness)

        # Maximization: best fitness first; stable so ties keep ask order.
        order = np.argsort(-np.asarray(fitnesses), kind="stable")
        selected = np.stack([evaluated[i].clipped for i in order[: self.mu]])

        old_mean = self.mean
        self.mean = self.weights @ selected
        y_w = (self.mean - old_mean) / self.sigma

        self.path_sigma = (1.0 - self.c_sigma) * self.path_sigma + math.sqrt(
            self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff
        ) * (self._inv_sqrt @ y_w)

        norm_ps = float(np.linalg.norm(self.path_sigma))
        decay = 1.0 - (1.0 - self.c_sigma) ** (2 * (self.generation + 1))
        h_sigma = norm_ps / math.sqrt(decay) / self.chi_n < 1.4 + 2.0 / (self.dimension + 1.0)

        self.path_cov = (1.0 - self.c_cov_path) * self.path_cov + (
            h_sigma
            * math.sqrt(self.c_cov_path * (2.0 - self.c_cov_path) * self.mu_eff)
        ) * y_w

        steps = (selected - old_mean) / self.sigma
        rank_mu = (self.weights[:, None] * steps).T @ steps
        # Variance correction keeps total decay consistent when h_sigma stalls.
        correction = (1.0 - h_sigma) * self.c_cov_path * (2.0 - self.c_cov_path)
        self.covariance = (
            (1.0 - self.c_rank_one - self.c_rank_mu) * self.covariance
            + self.c_rank_one
            * (np.outer(self.path_cov, self.path_cov) + correction * self.covariance)
            + self.c_rank_mu * rank_mu
        )

        self.sigma *= math.exp(
            (self.c_sigma / self.d_sigma) * (norm_ps / self.chi_n - 1.0)
        )

        self.generation += 1
        self._decompose()
