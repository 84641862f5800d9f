/**
 * The protocol loop: hello on start, then evaluate/result pairs over
 * stdin/stdout until shutdown. Scoring failures become error replies; the
 * process stays alive so one bad request cannot kill a long optimization.
 */

import { createInterface } from "node:readline";

import { TinyCausalLM } from "./model.js";
import { classifyRequest, encodeReply, errorReply, hello, result } from "./protocol.js";
import { loadInstances, scoreInstances, TaskInstance } from "./scoring.js";

export interface ServerConfig {
  mock: boolean;
  layers: number; // mock mode only; model mode introspects the model
  metric: string;
  maxConcurrency: number;
  taskFile?: string;
  windowSize: number;
  kernelSize: number;
  maxInstances: number;
  maxNewTokens: number;
  modelSeed: number;
}

export function serve(config: ServerConfig): void {
  const write = (reply: Parameters<typeof encodeReply>[0]) =>
    process.stdout.write(encodeReply(reply));

  let layers = config.layers;
  let scoreBudgets: (budgets: number[]) => number;

  if (config.mock) {
    scoreBudgets = (budgets) =>
      budgets.reduce((acc, b) => acc + b, 0) / layers / 1000.0;
  } else {
    if (!config.taskFile) throw new Error("--task-file is required without --mock");
    const model = new TinyCausalLM({
      layers: 4,
      heads: 2,
      dModel: 32,
      ffn: 64,
      maxPositions: 1024,
      seed: config.modelSeed,
    });
    const instances: TaskInstance[] = loadInstances(config.taskFile, config.maxInstances);
    layers = model.layerCount;
    scoreBudgets = (budgets) => {
      const smallest = Math.min(...budgets);
      if (smallest < config.windowSize) {
        throw new Error(`budget ${smallest} below window size ${config.windowSize}`);
      }
      return scoreInstances(model, instances, budgets, {
        metric: config.metric,
        eviction: { windowSize: config.windowSize, kernelSize: config.kernelSize },
        maxNewTokens: config.maxNewTokens,
      });
    };
  }

  write(hello(layers, config.metric, config.maxConcurrency, true));

  const reader = createInterface({ input: process.stdin, terminal: false });
  reader.on("line", (line) => {
    const outcome = classifyRequest(line, layers);
    switch (outcome.kind) {
      case "ignore":
        return;
      case "reply":
        write(outcome.reply);
        return;
      case "shutdown":
        process.exit(0);
      // eslint-disable-next-line no-fallthrough
      case "evaluate":
        try {
          write(result(outcome.id, scoreBudgets(outcome.budgets)));
        } catch (err) {
          write(errorReply(outcome.id, err instanceof Error ? err.message : String(err)));
        }
    }
  });
  reader.on("close", () => process.exit(0));
}
