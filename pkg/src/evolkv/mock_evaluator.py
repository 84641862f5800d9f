"""Protocol test double: a scorer subprocess with no model behind it.

Run as ``python -m evolkv.mock_evaluator``. Scores are ``mean(budgets)/1000``
(or a constant with ``--constant``), so optimizer plumbing can be exercised
end to end without any heavy dependency. ``--die-after N`` makes the process
exit abruptly when request N+1 arrives, for crash-path testing.

Reply contract (other protocol doubles must match it byte for byte):

* a line that is not a JSON object, or whose ``type`` is not a string, or an
  ``evaluate`` without an integer ``id``
  -> ``{"type":"error","id":-1,"message":"invalid request line"}``
* ``evaluate`` with a bad ``budgets`` field -> error with that id,
  message ``"budgets must be a list of non-negative integers"``
* ``evaluate`` with the wrong vector length -> error with that id,
  message ``"expected <layers> budgets, got <n>"``
* any other string ``type`` -> error (integer request id if present, else -1),
  message ``"unsupported message type: <type>"``
* ``shutdown`` -> exit 0.
"""

from __future__ import annotations

import argparse
import json
import sys
import time


def _reply(message: dict) -> None:
    sys.stdout.write(json.dumps(message, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def _error(request_id: int, message: str) -> None:
    _reply({"type": "error", "id": request_id, "message": message})


def serve(args: argparse.Namespace) -> int:
    _reply(
        {
            "type": "hello",
            "layers": args.layers,
            "metric": args.metric,
            "max_concurrency": args.max_concurrency,
            "deterministic": True,
        }
    )
    answered = 0
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            _error(-1, "invalid request line")
            continue
        if not isinstance(message, dict):
            _error(-1, "invalid request line")
            continue

        kind = message.get("type")
        request_id = message.get("id")
        has_id = isinstance(request_id, int) and not isinstance(request_id, bool)

        if not isinstance(kind, str):
            _error(-1, "invalid request line")
            continue
        if kind == "shutdown":
            return 0
        if kind != "evaluate":
            _error(request_id if has_id else -1, f"unsupported message type: {kind}")
            continue
        if not has_id:
            _error(-1, "invalid request line")
            continue

        if args.die_after is not None and answered >= args.die_after:
            return 1  # simulated crash: no reply, nonzero exit

        budgets = message.get("budgets")
        if not isinstance(budgets, list) or not all(
            isinstance(b, int) and not isinstance(b, bool) and b >= 0 for b in budgets
        ):
            _error(request_id, "budgets must be a list of non-negative integers")
            continue
        if len(budgets) != args.layers:
            _error(request_id, f"expected {args.layers} budgets, got {len(budgets)}")
            continue

        if args.delay > 0:
            time.sleep(args.delay)
        if args.constant is not None:
            score = args.constant
        else:
            score = (sum(budgets) / args.layers) / 1000.0
        _reply({"type": "result", "id": request_id, "score": score})
        answered += 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="wire-protocol scorer test double")
    parser.add_argument("--layers", type=int, default=32)
    parser.add_argument("--metric", default="mock")
    parser.add_argument("--max-concurrency", type=int, default=1)
    parser.add_argument("--constant", type=float, default=None,
                        help="return this fixed score instead of mean/1000")
    parser.add_argument("--die-after", type=int, default=None,
                        help="exit abruptly when evaluate request N+1 arrives")
    parser.add_argument("--delay", type=float, default=0.0,
                        help="seconds to sleep before each result")
    args = parser.parse_args(argv)
    return serve(args)


if __name__ == "__main__":
    sys.exit(main())
