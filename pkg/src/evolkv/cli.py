"""Command-line surface: optimize, complete, baseline, score, compare.

Configuration precedence is flags > config file (JSON mirroring the
FitnessConfig/SearchConfig field names) > built-in defaults; the environment
variable ``EVOLKV_SEED``, when set, overrides the seed from any source.
Every error path exits nonzero after printing a single ``error[<code>]:``
line on standard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .allocators import (
    fixed_position_allocation,
    pyramidal_allocation,
    uniform_allocation,
)
from .budgets import (
    FitnessConfig,
    LayerBudgets,
    PositionPolicy,
    SearchConfig,
    read_budget_file,
    write_budget_file,
)
from .completion import complete
from .evaluators import (
    EvaluationError,
    SaturatingTaskModel,
    SubprocessEvaluator,
    SyntheticEvaluator,
)
from .fitness import shaped_fitness
from .search import optimize, write_trajectory_csv


class CliError(Exception):
    """User-facing failure with a machine-greppable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: str, message: str) -> "CliError":
    return CliError(code, message)


def _make_evaluator(spec: str, timeout: float):
    """Build a scorer from an ``--evaluator`` spec: synthetic:<path> or exec:<cmd>."""
    if spec.startswith("synthetic:"):
        path = spec[len("synthetic:") :]
        try:
            model = SaturatingTaskModel.from_file(path)
        except FileNotFoundError:
            raise _fail("io", f"evaluator model file not found: {path}")
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise _fail("config", f"bad evaluator model file {path}: {exc}")
        return SyntheticEvaluator(model)
    if spec.startswith("exec:"):
        command = spec[len("exec:") :]
        if not command.strip():
            raise _fail("config", "exec: evaluator needs a command")
        return SubprocessEvaluator(command, evaluate_timeout=timeout)
    raise _fail("config", f"unknown evaluator spec {spec!r} (use synthetic: or exec:)")


def _load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise _fail("io", f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise _fail("config", f"config file is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise _fail("config", "config file must hold a JSON object")
    return doc


def _setting(flag_value, config: dict, key: str, default):
    """flags > config file > default; `lambda` is accepted as an alias of `lam`."""
    if flag_value is not None:
        return flag_value
    if key == "lam" and "lambda" in config:
        return config["lambda"]
    if key in config:
        return config[key]
    return default


def _resolve_seed(flag_value, config: dict) -> int:
    env = os.environ.get("EVOLKV_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _fail("config", f"EVOLKV_SEED must be an integer, got {env!r}")
    return int(_setting(flag_value, config, "rng_seed", 0))


def cmd_optimize(args: argparse.Namespace) -> int:
    config = _load_config_file(args.config)
    seed = _resolve_seed(args.seed, config)
    try:
        fitness_config = FitnessConfig(
            target_budget=int(_setting(args.target_budget, config, "target_budget", 128)),
            lam=float(_setting(args.lam, config, "lam", 0.3)),
            gamma=float(_setting(args.gamma, config, "gamma", 0.2)),
        )
        search_config = SearchConfig(
            group_size=int(_setting(args.group_size, config, "group_size", 8)),
            max_iterations_per_group=int(
                _setting(args.iterations, config, "max_iterations_per_group", 50)
            ),
            sigma=float(_setting(args.sigma, config, "sigma", 0.3)),
            population_size=_setting(args.population, config, "population_size", None),
            budget_lower_bound=int(
                _setting(args.lower_bound, config, "budget_lower_bound", 1)
            ),
            budget_upper_bound=_setting(
                args.upper_bound, config, "budget_upper_bound", None
            ),
            rng_seed=seed,
        )
        layers = int(_setting(args.layers, config, "layers", 32))
    except ValueError as exc:
        raise _fail("config", str(exc))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    evaluator = _make_evaluator(args.evaluator, args.timeout)
    try:
        result = optimize(
            evaluator, fitness_config, search_config, layers, jobs=args.jobs
        )
    except EvaluationError as exc:
        raise _fail("evaluation", str(exc))
    except ValueError as exc:
        raise _fail("config", str(exc))
    finally:
        if isinstance(evaluator, SubprocessEvaluator):
            evaluator.close()

    write_budget_file(out_dir / "budgets.json", result.best_budgets)
    write_budget_file(
        out_dir / "budgets.completed.json",
        complete(result.best_budgets, fitness_config.target_budget),
    )
    write_trajectory_csv(result.trajectory, out_dir / "trajectory.csv")

    manifest = {
        "version": __version__,
        "layers": layers,
        "target_budget": fitness_config.target_budget,
        "lambda": fitness_config.lam,
        "gamma": fitness_config.gamma,
        "group_size": search_config.group_size,
        "max_iterations_per_group": search_config.max_iterations_per_group,
        "sigma": search_config.sigma,
        "population_size": search_config.resolved_population_size(),
        "budget_lower_bound": search_config.budget_lower_bound,
        "budget_upper_bound": search_config.resolved_upper_bound(
            fitness_config.target_budget
        ),
        "rng_seed": seed,
        "evaluator": args.evaluator,
        "jobs": args.jobs,
        "evaluations_used": result.evaluations_used,
        "best_fitness": result.best_fitness,
        "best_raw_score": result.best_raw_score,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )

    print(
        f"best shaped fitness {result.best_fitness:.6g} "
        f"(raw {result.best_raw_score:.6g}, "
        f"mean budget {result.best_budgets.mean():.2f}) "
        f"after {result.evaluations_used} evaluations -> {out_dir}"
    )
    return 0


def cmd_complete(args: argparse.Namespace) -> int:
    try:
        budgets, policy = read_budget_file(args.infile)
    except FileNotFoundError:
        raise _fail("io", f"budget file not found: {args.infile}")
    except (ValueError, json.JSONDecodeError) as exc:
        raise _fail("config", f"bad budget file {args.infile}: {exc}")
    try:
        completed = complete(budgets, args.target)
    except ValueError as exc:
        raise _fail("config", str(exc))
    write_budget_file(args.out, completed, policy)
    if args.target * budgets.layer_count < budgets.total():
        print(f"note: down-scaling from mean {budgets.mean():.2f} to target {args.target}")
    print(f"completed to mean {completed.mean():.4f} (target {args.target}) -> {args.out}")
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    policy: Optional[PositionPolicy] = None
    try:
        if args.strategy == "uniform":
            budgets = uniform_allocation(args.layers, args.budget)
        elif args.strategy == "pyramid":
            budgets = pyramidal_allocation(args.layers, args.budget, args.taper)
        else:
            budgets, policy = fixed_position_allocation(
                args.layers, args.budget, args.sink_tokens
            )
    except ValueError as exc:
        raise _fail("config", str(exc))
    write_budget_file(args.out, budgets, policy)
    print(f"{args.strategy} allocation (mean {budgets.mean():.2f}) -> {args.out}")
    return 0


def _read_budgets_or_fail(path: str) -> LayerBudgets:
    try:
        budgets, _ = read_budget_file(path)
        return budgets
    except FileNotFoundError:
        raise _fail("io", f"budget file not found: {path}")
    except (ValueError, json.JSONDecodeError) as exc:
        raise _fail("config", f"bad budget file {path}: {exc}")


def cmd_score(args: argparse.Namespace) -> int:
    budgets = _read_budgets_or_fail(args.budgets)
    evaluator = _make_evaluator(args.evaluator, args.timeout)
    try:
        if evaluator.layer_count != budgets.layer_count:
            raise _fail(
                "config",
                f"budget file has {budgets.layer_count} layers, "
                f"evaluator expects {evaluator.layer_count}",
            )
        score = evaluator.evaluate(budgets)
    except EvaluationError as exc:
        raise _fail("evaluation", str(exc))
    finally:
        if isinstance(evaluator, SubprocessEvaluator):
            evaluator.close()
    print(score)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    fitness_config = FitnessConfig(
        target_budget=args.target_budget, lam=args.lam, gamma=args.gamma
    )
    evaluator = _make_evaluator(args.evaluator, args.timeout)
    rows = []
    try:
        for path in args.budget_files:
            budgets = _read_budgets_or_fail(path)
            if evaluator.layer_count != budgets.layer_count:
                raise _fail(
                    "config",
                    f"{path}: {budgets.layer_count} layers, "
                    f"evaluator expects {evaluator.layer_count}",
                )
            try:
                raw = evaluator.evaluate(budgets)
            except EvaluationError as exc:
                raise _fail("evaluation", f"{path}: {exc}")
            shaped = shaped_fitness(raw, budgets, fitness_config)
            rows.append(
                {
                    "name": Path(path).stem,
                    "mean_budget": shaped.mean_budget,
                    "raw_score": shaped.raw_score,
                    "shaped_fitness": shaped.shaped_value,
                }
            )
    finally:
        if isinstance(evaluator, SubprocessEvaluator):
            evaluator.close()

    rows.sort(key=lambda r: r["shaped_fitness"], reverse=True)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["name", "mean_budget", "raw_score", "shaped_fitness"])
        for row in rows:
            writer.writerow(
                [
                    row["name"],
                    repr(row["mean_budget"]),
                    repr(row["raw_score"]),
                    repr(row["shaped_fitness"]),
                ]
            )
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evolkv",
        description="task-driven evolutionary search over per-layer KV cache budgets",
    )
    parser.add_argument("--version", action="version", version=f"evolkv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run the group-wise budget search")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--target-budget", type=int, default=None)
    p.add_argument("--group-size", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None,
                   help="CMA-ES generations per group")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="weight of the efficiency multiplier")
    p.add_argument("--gamma", type=float, default=None,
                   help="under-budget smoothing factor")
    p.add_argument("--lower-bound", type=int, default=None)
    p.add_argument("--upper-bound", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1,
                   help="max concurrent evaluator calls")
    p.add_argument("--timeout", type=float, default=600.0,
                   help="per-evaluation timeout for exec: evaluators (s)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--evaluator", required=True,
                   help="synthetic:<model.json> or exec:\"<command>\"")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("complete", help="re-target a budget file to a new average")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("baseline", help="write a heuristic allocation")
    p.add_argument("--strategy", choices=["uniform", "pyramid", "fixed"], required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--taper", type=float, default=0.2,
                   help="pyramid bottom-to-top ratio")
    p.add_argument("--sink-tokens", type=int, default=4,
                   help="fixed-position leading tokens")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("score", help="evaluate one budget file")
    p.add_argument("--budgets", required=True)
    p.add_argument("--evaluator", required=True)
    p.add_argument("--timeout", type=float, default=600.0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare", help="rank budget files against one evaluator")
    p.add_argument("budget_files", nargs="+")
    p.add_argument("--evaluator", required=True)
    p.add_argument("--target-budget", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.3)
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--timeout", type=float, default=600.0)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except EvaluationError as exc:
        print(f"error[evaluation]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
