#!/usr/bin/env node
/**
 * Entry point. Serves the wire protocol over stdin/stdout, either against
 * the built-in seeded causal transformer (default) or as a model-free mock:
 *
 *   node dist/main.js --task-file tasks/toy.jsonl --metric f1 --window-size 4
 *   node dist/main.js --mock --layers 32
 */

import { parseArgs } from "node:util";

import { METRIC_NAMES } from "./metrics.js";
import { serve } from "./server.js";

const { values } = parseArgs({
  options: {
    mock: { type: "boolean", default: false },
    layers: { type: "string", default: "32" },
    metric: { type: "string" },
    "max-concurrency": { type: "string", default: "1" },
    "task-file": { type: "string" },
    "window-size": { type: "string", default: "32" },
    "kernel-size": { type: "string", default: "7" },
    pooling: { type: "string", default: "max" },
    "max-instances": { type: "string", default: "5" },
    "max-new-tokens": { type: "string", default: "16" },
    "model-seed": { type: "string", default: "7" },
    "model-id": { type: "string", default: "tiny-causal-v1" },
  },
});

const metric = values.metric ?? (values.mock ? "mock" : "f1");
if (!values.mock && !METRIC_NAMES.includes(metric as never)) {
  process.stderr.write(`unknown metric ${metric}; expected ${METRIC_NAMES.join(", ")}\n`);
  process.exit(2);
}
if (values.pooling !== "max") {
  process.stderr.write(`only max pooling is supported, got ${values.pooling}\n`);
  process.exit(2);
}

try {
  serve({
    mock: values.mock as boolean,
    layers: parseInt(values.layers as string, 10),
    metric,
    maxConcurrency: parseInt(values["max-concurrency"] as string, 10),
    taskFile: values["task-file"],
    windowSize: parseInt(values["window-size"] as string, 10),
    kernelSize: parseInt(values["kernel-size"] as string, 10),
    maxInstances: parseInt(values["max-instances"] as string, 10),
    maxNewTokens: parseInt(values["max-new-tokens"] as string, 10),
    modelSeed: parseInt(values["model-seed"] as string, 10),
  });
} catch (err) {
  process.stderr.write(`${err instanceof Error ? err.message : String(err)}\n`);
  process.exit(2);
}
