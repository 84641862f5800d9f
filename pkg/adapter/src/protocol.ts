/**
 * Wire message types and the reply contract for the scorer side of the
 * line-delimited JSON protocol.
 *
 * The exact reply strings matter: protocol doubles (this adapter's --mock
 * mode and the optimizer repo's Python mock) must be byte-identical on the
 * wire, so validation order and error messages are fixed here:
 *
 *  - non-object line, non-string "type", or evaluate without integer "id"
 *      -> {"type":"error","id":-1,"message":"invalid request line"}
 *  - bad budgets field  -> "budgets must be a list of non-negative integers"
 *  - wrong vector length -> "expected <layers> budgets, got <n>"
 *  - other string types -> "unsupported message type: <type>"
 *  - shutdown           -> exit 0
 */

export interface HelloMessage {
  type: "hello";
  layers: number;
  metric: string;
  max_concurrency: number;
  deterministic: boolean;
}

export interface ResultMessage {
  type: "result";
  id: number;
  score: number;
}

export interface ErrorMessage {
  type: "error";
  id: number;
  message: string;
}

export type Reply = HelloMessage | ResultMessage | ErrorMessage;

export function encodeReply(reply: Reply): string {
  return JSON.stringify(reply) + "\n";
}

export function hello(
  layers: number,
  metric: string,
  maxConcurrency: number,
  deterministic: boolean,
): HelloMessage {
  return {
    type: "hello",
    layers,
    metric,
    max_concurrency: maxConcurrency,
    deterministic,
  };
}

export function result(id: number, score: number): ResultMessage {
  return { type: "result", id, score };
}

export function errorReply(id: number, message: string): ErrorMessage {
  return { type: "error", id, message };
}

export type RequestOutcome =
  | { kind: "reply"; reply: Reply }
  | { kind: "evaluate"; id: number; budgets: number[]; policy?: unknown }
  | { kind: "shutdown" }
  | { kind: "ignore" };

/** Validate one request line; evaluate requests come back for scoring. */
export function classifyRequest(line: string, layers: number): RequestOutcome {
  if (line.trim().length === 0) return { kind: "ignore" };
  let message: unknown;
  try {
    message = JSON.parse(line);
  } catch {
    return { kind: "reply", reply: errorReply(-1, "invalid request line") };
  }
  if (typeof message !== "object" || message === null || Array.isArray(message)) {
    return { kind: "reply", reply: errorReply(-1, "invalid request line") };
  }
  const request = message as Record<string, unknown>;
  const type = request["type"];
  const id = request["id"];
  const hasId = typeof id === "number" && Number.isInteger(id);

  if (typeof type !== "string") {
    return { kind: "reply", reply: errorReply(-1, "invalid request line") };
  }
  if (type === "shutdown") return { kind: "shutdown" };
  if (type !== "evaluate") {
    return {
      kind: "reply",
      reply: errorReply(hasId ? (id as number) : -1, `unsupported message type: ${type}`),
    };
  }
  if (!hasId) {
    return { kind: "reply", reply: errorReply(-1, "invalid request line") };
  }

  const budgets = request["budgets"];
  const isBudgetVector =
    Array.isArray(budgets) &&
    budgets.every((b) => typeof b === "number" && Number.isInteger(b) && b >= 0);
  if (!isBudgetVector) {
    return {
      kind: "reply",
      reply: errorReply(id as number, "budgets must be a list of non-negative integers"),
    };
  }
  if ((budgets as number[]).length !== layers) {
    return {
      kind: "reply",
      reply: errorReply(
        id as number,
        `expected ${layers} budgets, got ${(budgets as number[]).length}`,
      ),
    };
  }
  return {
    kind: "evaluate",
    id: id as number,
    budgets: budgets as number[],
    policy: request["policy"],
  };
}
