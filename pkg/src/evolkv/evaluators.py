"""Task scorers: the synthetic saturating family and the subprocess client.

A scorer maps a budget vector to a scalar task score. The synthetic family is
a separable saturating model with a closed form, which makes the exact
optimum computable by greedy marginal-gain assignment and turns end-to-end
search results into checkable claims. Real scorers run out of process and
speak the line-delimited JSON protocol in :mod:`evolkv.protocol`.
"""

from __future__ import annotations

import heapq
import importlib.resources
import json
import math
import shlex
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from .budgets import LayerBudgets, PositionPolicy
from .protocol import ProtocolError, encode_message, parse_message


class EvaluationError(RuntimeError):
    """A scorer failed to produce a usable score.

    ``payload`` carries machine-readable diagnostics; when the failure happens
    inside an optimization run, ``group_index`` and ``generation`` locate it.
    """

    def __init__(
        self,
        message: str,
        payload: Optional[dict] = None,
        group_index: Optional[int] = None,
        generation: Optional[int] = None,
    ):
        super().__init__(message)
        self.payload = payload or {}
        self.group_index = group_index
        self.generation = generation


class Evaluator(Protocol):
    """Anything that can score a budget vector for a fixed layer count."""

    layer_count: int
    metric_name: str
    max_concurrency: int
    deterministic: bool

    def evaluate(self, budgets: LayerBudgets) -> float: ...


@dataclass(frozen=True)
class SaturatingTaskModel:
    """Separable synthetic task: each layer's value saturates with its budget.

    Layer i contributes ``w_i * (1 - exp(-k_i / tau_i))``; weights are
    normalized to sum 1 so the noiseless score lives in [0, 1]. Optional
    Gaussian noise is keyed by (seed, budget vector), so re-scoring the same
    scheme always returns the same value.
    """

    weights: Tuple[float, ...]
    time_constants: Tuple[float, ...]
    noise_std: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.weights) != len(self.time_constants):
            raise ValueError("weights and time_constants must have equal length")
        if len(self.weights) == 0:
            raise ValueError("model must have at least one layer")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if any(t <= 0 for t in self.time_constants):
            raise ValueError("time_constants must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        total = float(sum(self.weights))
        object.__setattr__(
            self, "weights", tuple(float(w) / total for w in self.weights)
        )
        object.__setattr__(
            self, "time_constants", tuple(float(t) for t in self.time_constants)
        )

    @property
    def layer_count(self) -> int:
        return len(self.weights)

    def to_json_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "time_constants": list(self.time_constants),
            "noise_std": self.noise_std,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SaturatingTaskModel":
        return cls(
            weights=tuple(doc["weights"]),
            time_constants=tuple(doc["time_constants"]),
            noise_std=float(doc.get("noise_std", 0.0)),
            rng_seed=int(doc.get("rng_seed", 0)),
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SaturatingTaskModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    @classmethod
    def bundled(cls, name: str = "midpeak32") -> "SaturatingTaskModel":
        """Load a fixture model shipped with the package."""
        resource = importlib.resources.files("evolkv") / "fixtures" / f"{name}.json"
        return cls.from_json_dict(json.loads(resource.read_text()))


def synthetic_evaluate(model: SaturatingTaskModel, budgets: LayerBudgets) -> float:
    """Score a budget vector under the saturating model (plus keyed noise)."""
    if budgets.layer_count != model.layer_count:
        raise ValueError(
            f"budget vector has {budgets.layer_count} layers, "
            f"model expects {model.layer_count}"
        )
    k = np.asarray(budgets.budgets, dtype=float)
    tau = np.asarray(model.time_constants)
    w = np.asarray(model.weights)
    score = float(np.sum(w * (1.0 - np.exp(-k / tau))))
    if model.noise_std > 0:
        # Entropy = (seed, scheme): the same scheme always draws the same noise.
        rng = np.random.default_rng([model.rng_seed & 0xFFFFFFFF, *budgets.budgets])
        score += float(rng.normal(0.0, model.noise_std))
    return score


def water_filling_optimum(
    model: SaturatingTaskModel, total_budget: int
) -> Tuple[LayerBudgets, float]:
    """Exact noiseless optimum of the saturating model under a total-budget cap.

    Greedy unit-token assignment by the discrete marginal gain
    ``w_i * (1 - exp(-1/tau_i)) * exp(-k/tau_i)``, which decreases in k, so
    greedy is exact for this separable concave objective.
    """
    if total_budget < 0:
        raise ValueError(f"total_budget must be >= 0, got {total_budget}")
    L = model.layer_count
    w = model.weights
    tau = model.time_constants
    step = [w[i] * (1.0 - math.exp(-1.0 / tau[i])) for i in range(L)]
    decay = [math.exp(-1.0 / tau[i]) for i in range(L)]

    alloc = [0] * L
    # Max-heap of (next marginal gain, layer); gains only ever shrink.
    heap = [(-step[i], i) for i in range(L)]
    heapq.heapify(heap)
    gain = list(step)
    for _ in range(total_budget):
        neg, i = heapq.heappop(heap)
        alloc[i] += 1
        gain[i] *= decay[i]
        heapq.heappush(heap, (-gain[i], i))
    budgets = LayerBudgets(tuple(alloc), L)
    noiseless = SaturatingTaskModel(
        weights=w, time_constants=tau, noise_std=0.0, rng_seed=model.rng_seed
    )
    return budgets, synthetic_evaluate(noiseless, budgets)


class SyntheticEvaluator:
    """In-process scorer over a saturating task model."""

    def __init__(self, model: SaturatingTaskModel, max_concurrency: int = 8):
        self.model = model
        self.layer_count = model.layer_count
        self.metric_name = "synthetic_saturating"
        self.max_concurrency = max_concurrency
        # Keyed noise makes scoring a pure function of the scheme.
        self.deterministic = True

    def evaluate(self, budgets: LayerBudgets) -> float:
        return synthetic_evaluate(self.model, budgets)


class SubprocessEvaluator:
    """Client for an external scorer speaking the wire protocol.

    Requests are correlated by id, so when the scorer's hello advertises
    ``max_concurrency > 1`` several evaluations may be in flight at once.
    Use as a context manager or call :meth:`close` to shut the scorer down.
    """

    def __init__(
        self,
        command: Union[str, Sequence[str]],
        evaluate_timeout: float = 600.0,
        hello_timeout: float = 60.0,
    ):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.command = argv
        self.evaluate_timeout = evaluate_timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise EvaluationError(
                f"failed to launch evaluator {argv!r}: {exc}",
                payload={"command": argv},
            ) from exc

        self._write_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._pending: Dict[int, dict] = {}  # id -> {"event": Event, "response": msg}
        self._next_id = 0
        self._dead: Optional[str] = None
        self._stderr_tail: List[str] = []

        self._stderr_thread = threading.Thread(target=self._drain_stderr, daemon=True)
        self._stderr_thread.start()

        hello_slot: dict = {"event": threading.Event(), "response": None}
        self._hello_slot = hello_slot
        self._reader_thread = threading.Thread(target=self._read_loop, daemon=True)
        self._reader_thread.start()

        if not hello_slot["event"].wait(hello_timeout):
            self.close(force=True)
            raise EvaluationError(
                "evaluator did not send hello in time", payload=self._diagnostics()
            )
        hello = hello_slot["response"]
        if hello is None:
            raise EvaluationError(
                f"evaluator exited before hello: {self._dead}",
                payload=self._diagnostics(),
            )
        self.layer_count = hello["layers"]
        self.metric_name = hello["metric"]
        self.max_concurrency = max(1, hello["max_concurrency"])
        self.deterministic = hello["deterministic"]
        # Callers may fire from many threads; in-flight requests are capped at
        # whatever the scorer's handshake advertised.
        self._slots = threading.BoundedSemaphore(self.max_concurrency)

    # -- wire plumbing -----------------------------------------------------

    def _drain_stderr(self) -> None:
        try:
            for line in self._proc.stderr:
                self._stderr_tail.append(line.rstrip("\n"))
                del self._stderr_tail[:-20]
        except ValueError:
            pass  # stream closed during shutdown

    def _read_loop(self) -> None:
        try:
            for line in self._proc.stdout:
                if not line.strip():
                    continue
                try:
                    message = parse_message(line)
                except ProtocolError as exc:
                    self._fail_all(f"malformed evaluator output: {exc}")
                    return
                if message["type"] == "hello":
                    self._hello_slot["response"] = message
                    self._hello_slot["event"].set()
                    continue
                if message["type"] in ("result", "error"):
                    with self._state_lock:
                        slot = self._pending.pop(message["id"], None)
                    if slot is not None:
                        slot["response"] = message
                        slot["event"].set()
        except ValueError:
            pass  # stream closed during shutdown
        finally:
            self._fail_all("evaluator process closed its output stream")

    def _fail_all(self, reason: str) -> None:
        with self._state_lock:
            if self._dead is None:
                self._dead = reason
            pending = list(self._pending.values())
            self._pending.clear()
        for slot in pending:
            slot["event"].set()
        self._hello_slot["event"].set()

    def _diagnostics(self) -> dict:
        return {
            "command": self.command,
            "returncode": self._proc.poll(),
            "stderr_tail": list(self._stderr_tail),
        }

    # -- public surface ----------------------------------------------------

    def evaluate(
        self, budgets: LayerBudgets, policy: Optional[PositionPolicy] = None
    ) -> float:
        with self._slots:
            return self._evaluate_locked(budgets, policy)

    def _evaluate_locked(
        self, budgets: LayerBudgets, policy: Optional[PositionPolicy]
    ) -> float:
        with self._state_lock:
            if self._dead is not None:
                raise EvaluationError(
                    f"evaluator unavailable: {self._dead}", payload=self._diagnostics()
                )
            request_id = self._next_id
            self._next_id += 1
            slot: dict = {"event": threading.Event(), "response": None}
            self._pending[request_id] = slot

        request = {"type": "evaluate", "id": request_id, "budgets": list(budgets.budgets)}
        if policy is not None:
            request["policy"] = policy.to_json_dict()
        try:
            with self._write_lock:
                self._proc.stdin.write(encode_message(request))
                self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            self._fail_all(f"write to evaluator failed: {exc}")
            raise EvaluationError(
                f"write to evaluator failed: {exc}", payload=self._diagnostics()
            ) from exc

        if not slot["event"].wait(self.evaluate_timeout):
            with self._state_lock:
                self._pending.pop(request_id, None)
            raise EvaluationError(
                f"evaluation {request_id} timed out after {self.evaluate_timeout}s",
                payload=self._diagnostics(),
            )
        response = slot["response"]
        if response is None:
            raise EvaluationError(
                f"evaluator died before answering request {request_id}: {self._dead}",
                payload=self._diagnostics(),
            )
        if response["type"] == "error":
            raise EvaluationError(
                f"evaluator error for request {request_id}: {response['message']}",
                payload={"response": response, **self._diagnostics()},
            )
        score = float(response["score"])
        if not math.isfinite(score):
            raise EvaluationError(
                f"evaluator returned non-finite score {score!r}",
                payload={"response": response},
            )
        return score

    def close(self, force: bool = False) -> None:
        if self._proc.poll() is None:
            if not force:
                try:
                    with self._write_lock:
                        self._proc.stdin.write(encode_message({"type": "shutdown"}))
                        self._proc.stdin.flush()
                except (OSError, ValueError):
                    pass
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._fail_all("evaluator closed")

    def __enter__(self) -> "SubprocessEvaluator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
