"""Line-delimited JSON messages exchanged with external scorer subprocesses.

Message flow over the subprocess's standard streams, one JSON object per
newline-terminated line:

    evaluator -> client   {"type": "hello", "layers": L, "metric": str,
                           "max_concurrency": int, "deterministic": bool}
    client -> evaluator   {"type": "evaluate", "id": n, "budgets": [k, ...],
                           "policy": {...}?}
    evaluator -> client   {"type": "result", "id": n, "score": x}
                       or {"type": "error", "id": n, "message": str}
    client -> evaluator   {"type": "shutdown"}        (evaluator then exits 0)

Unknown fields are preserved and ignored so either side can extend messages
without breaking the other. A line that is not valid JSON, or a message
missing required fields, raises ``ProtocolError``.
"""

from __future__ import annotations

import json
from typing import Any, Dict


class ProtocolError(ValueError):
    """A wire message that cannot be parsed or fails validation."""


_REQUIRED_FIELDS = {
    "hello": {"layers": int, "metric": str, "max_concurrency": int, "deterministic": bool},
    "evaluate": {"id": int, "budgets": list},
    "result": {"id": int, "score": (int, float)},
    "error": {"id": int, "message": str},
    "shutdown": {},
}


def encode_message(message: Dict[str, Any]) -> str:
    """Serialize a message to its single-line wire form (newline included)."""
    return json.dumps(message, separators=(",", ":")) + "\n"


def parse_message(line: str) -> Dict[str, Any]:
    """Parse and validate one wire line; extra fields pass through untouched."""
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON on wire: {line!r}") from exc
    if not isinstance(message, dict):
        raise ProtocolError(f"wire message must be an object, got {type(message).__name__}")
    kind = message.get("type")
    if kind not in _REQUIRED_FIELDS:
        raise ProtocolError(f"unknown message type: {kind!r}")
    for name, expected in _REQUIRED_FIELDS[kind].items():
        if name not in message:
            raise ProtocolError(f"{kind} message missing field {name!r}")
        if expected is int:
            # bool is an int subclass; ids/layers must be true integers
            if isinstance(message[name], bool) or not isinstance(message[name], int):
                raise ProtocolError(f"{kind}.{name} must be an integer")
        elif not isinstance(message[name], expected):
            raise ProtocolError(f"{kind}.{name} has wrong type")
    if kind == "evaluate":
        budgets = message["budgets"]
        if not all(isinstance(b, int) and not isinstance(b, bool) for b in budgets):
            raise ProtocolError("evaluate.budgets must be a list of integers")
    return message
