"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete. Quantitative checks ride on the committed synthetic
fixture (32 layers, mid-depth importance peak), whose exact optimum is
computable by greedy assignment.
"""

import json
import sys
import time

import numpy as np
import pytest

from evolkv.budgets import FitnessConfig, LayerBudgets, SearchConfig
from evolkv.allocators import pyramidal_allocation, uniform_allocation
from evolkv.cli import main
from evolkv.cmaes import CmaEs
from evolkv.completion import complete
from evolkv.evaluators import (
    EvaluationError,
    SaturatingTaskModel,
    SubprocessEvaluator,
    SyntheticEvaluator,
    water_filling_optimum,
)
from evolkv.fitness import cache_score
from evolkv.budgets import population_size_for
from evolkv.search import optimize

SEEDS = (1, 2, 3)


def report(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {status}{suffix}")


@pytest.fixture(scope="module")
def fixture_model():
    return SaturatingTaskModel.bundled()


@pytest.fixture(scope="module")
def oracle_gap_runs(fixture_model):
    """The three seeded optimization runs shared by several criteria."""
    evaluator = SyntheticEvaluator(fixture_model)
    fitness = FitnessConfig(target_budget=128)
    runs = {}
    start = time.monotonic()
    for seed in SEEDS:
        config = SearchConfig(rng_seed=seed)
        assert config.group_size == 8 and config.resolved_population_size() == 10
        assert config.max_iterations_per_group == 50
        runs[seed] = optimize(evaluator, fitness, config, 32)
    return runs, time.monotonic() - start


def test_cache_score_algebra():
    cfg = FitnessConfig(target_budget=128, gamma=0.2)
    checks = [
        (cache_score(128, cfg), 1.0),
        (cache_score(256, cfg), 0.0),
        (cache_score(64, cfg), 0.9),
        (cache_score(160, cfg), 0.75),
    ]
    passed = all(abs(got - want) <= 1e-12 for got, want in checks)
    report("cache-score-algebra", passed)
    assert passed, checks


def test_population_size_formula():
    got = [population_size_for(n) for n in (2, 4, 8, 16, 32)]
    passed = got == [6, 8, 10, 12, 14]
    report("population-size-formula", passed, f"{got}")
    assert passed


def test_completion_conservation():
    start = time.monotonic()
    rng = np.random.default_rng(424242)
    passed = True
    for _ in range(1000):
        length = int(rng.integers(1, 65))
        budgets = rng.integers(0, 4097, size=length)
        if budgets.sum() == 0:
            budgets[int(rng.integers(length))] = int(rng.integers(1, 4097))
        target = int(rng.integers(1, 4097))
        out = np.array(complete(LayerBudgets.of(budgets), target).budgets)

        total = target * length
        if not (total <= out.sum() <= total + length):
            passed = False
        order = np.argsort(budgets, kind="stable")
        if np.any(np.diff(out[order]) < 0):
            passed = False  # order preservation violated
        if np.any(out[budgets == 0] != 0):
            passed = False  # zero preservation violated
    elapsed = time.monotonic() - start
    passed = passed and elapsed < 5.0
    report("completion-conservation", passed, f"{elapsed:.2f}s for 1000 vectors")
    assert passed


def _best_of(objective, seed, dimension, max_evals):
    es = CmaEs(dimension, [0.5] * dimension, 0.3, 10, seed)
    best = -np.inf
    evals = 0
    while evals < max_evals:
        candidates = es.ask()
        evaluated = []
        for cand in candidates:
            value = objective(cand.clipped)
            evals += 1
            best = max(best, value)
            evaluated.append(cand.with_fitness(value))
        es.tell(evaluated)
    return best


def test_cmaes_convergence():
    def sphere(x):
        return -float(np.sum((x - 0.7) ** 2))

    def rosenbrock(x):
        z = 4.0 * np.asarray(x) - 2.0
        return -float(np.sum(100.0 * (z[1:] - z[:-1] ** 2) ** 2 + (1.0 - z[:-1]) ** 2))

    start = time.monotonic()
    sphere_best = [_best_of(sphere, seed, 8, 2000) for seed in SEEDS]
    rosen_best = [_best_of(rosenbrock, seed, 8, 5000) for seed in SEEDS]
    elapsed = time.monotonic() - start
    passed = (
        all(b > -1e-6 for b in sphere_best)
        and all(b > -1e-3 for b in rosen_best)
        and elapsed < 10.0
    )
    report(
        "cmaes-convergence",
        passed,
        f"sphere {max(-b for b in sphere_best):.1e}, "
        f"rosenbrock {max(-b for b in rosen_best):.1e}, {elapsed:.2f}s",
    )
    assert passed


def test_oracle_gap(fixture_model, oracle_gap_runs):
    runs, elapsed = oracle_gap_runs
    evaluator = SyntheticEvaluator(fixture_model)
    uniform_score = evaluator.evaluate(uniform_allocation(32, 128))
    pyramid_score = evaluator.evaluate(pyramidal_allocation(32, 128, 0.2))
    _, oracle = water_filling_optimum(fixture_model, 128 * 32)

    # learned budgets are compared at the target total: pin the average to the
    # target by completion, then score noiselessly
    scores = []
    for seed in SEEDS:
        completed = complete(runs[seed].best_budgets, 128)
        scores.append(evaluator.evaluate(completed))
    averaged = float(np.mean(scores))

    passed = (
        averaged >= uniform_score
        and averaged >= pyramid_score
        and averaged >= 0.95 * oracle
        and elapsed < 60.0
    )
    report(
        "oracle-gap",
        passed,
        f"learned {averaged:.4f} vs uniform {uniform_score:.4f}, "
        f"pyramid {pyramid_score:.4f}, oracle {oracle:.4f} "
        f"(ratio {averaged / oracle:.3f}), {elapsed:.1f}s",
    )
    assert passed


def test_trajectory_monotonicity(oracle_gap_runs):
    runs, _ = oracle_gap_runs
    passed = True
    for result in runs.values():
        values = [p.best_so_far for p in result.trajectory]
        if values != sorted(values):
            passed = False
    report("trajectory-monotonicity", passed, f"{len(runs)} runs checked")
    assert passed


def test_scaling_generalization(fixture_model):
    start = time.monotonic()
    evaluator = SyntheticEvaluator(fixture_model)

    low = optimize(
        evaluator, FitnessConfig(target_budget=128), SearchConfig(rng_seed=1), 32
    )
    expanded = complete(low.best_budgets, 512)
    expanded_score = evaluator.evaluate(expanded)

    high = optimize(
        evaluator, FitnessConfig(target_budget=512), SearchConfig(rng_seed=1), 32
    )
    direct_score = evaluator.evaluate(complete(high.best_budgets, 512))
    elapsed = time.monotonic() - start

    # expansion may legitimately beat direct optimization at the larger target;
    # the criterion bounds how far it may fall short
    passed = expanded_score >= 0.98 * direct_score and elapsed < 120.0
    report(
        "scaling-generalization",
        passed,
        f"expanded {expanded_score:.4f} vs direct {direct_score:.4f} "
        f"(ratio {expanded_score / direct_score:.3f}), {elapsed:.1f}s",
    )
    assert passed


def test_determinism(tmp_path):
    fixture = tmp_path / "model.json"
    fixture.write_text(json.dumps(SaturatingTaskModel.bundled().to_json_dict()))
    argv = [
        "optimize", "--layers", "32", "--target-budget", "128",
        "--group-size", "8", "--iterations", "50", "--seed", "42",
        "--evaluator", f"synthetic:{fixture}",
    ]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    passed = True
    for name in ("budgets.json", "budgets.completed.json", "manifest.json",
                 "trajectory.csv"):
        if (tmp_path / "a" / name).read_bytes() != (tmp_path / "b" / name).read_bytes():
            passed = False
    report("determinism", passed)
    assert passed


def test_protocol_conformance():
    mock = f'"{sys.executable}" -m evolkv.mock_evaluator --layers 8'

    evaluator = SubprocessEvaluator(mock)
    try:
        result = optimize(
            evaluator,
            FitnessConfig(target_budget=64),
            SearchConfig(group_size=4, max_iterations_per_group=3, rng_seed=0),
            8,
        )
        full_run_ok = result.evaluations_used == 2 * 3 * 8
    finally:
        evaluator.close()

    crashing = SubprocessEvaluator(mock + " --die-after 20")
    structured_error = False
    try:
        optimize(
            crashing,
            FitnessConfig(target_budget=64),
            SearchConfig(group_size=4, max_iterations_per_group=3, rng_seed=0),
            8,
        )
    except EvaluationError as exc:
        structured_error = (
            exc.group_index is not None
            and exc.generation is not None
            and "group" in str(exc)
            and "generation" in str(exc)
        )
    finally:
        crashing.close(force=True)

    passed = full_run_ok and structured_error
    report("protocol-conformance", passed)
    assert passed
