/**
 * Instance loading and budgeted scoring: run the model over a small task
 * set under a per-layer cache budget and average the metric.
 */

import { readFileSync } from "node:fs";

import { metricByName } from "./metrics.js";
import { EvictionParams, TinyCausalLM } from "./model.js";
import { decodeTokens, encodeText } from "./tokenizer.js";

export interface TaskInstance {
  input: string;
  target: string;
}

export function loadInstances(path: string, maxInstances: number): TaskInstance[] {
  const instances: TaskInstance[] = [];
  for (const line of readFileSync(path, "utf-8").split("\n")) {
    if (line.trim().length === 0) continue;
    const doc = JSON.parse(line);
    if (typeof doc.input !== "string" || typeof doc.target !== "string") {
      throw new Error(`task instance needs string "input" and "target": ${line}`);
    }
    instances.push({ input: doc.input, target: doc.target });
    if (instances.length >= maxInstances) break;
  }
  if (instances.length === 0) throw new Error(`no instances in ${path}`);
  return instances;
}

export interface ScoringOptions {
  metric: string;
  eviction: EvictionParams;
  maxNewTokens: number;
}

/**
 * Mean metric over the instances. ``budgets === null`` disables eviction
 * entirely (the full-cache reference); roomy budgets must reproduce it
 * exactly, since eviction is then a no-op on every layer.
 */
export function scoreInstances(
  model: TinyCausalLM,
  instances: TaskInstance[],
  budgets: number[] | null,
  options: ScoringOptions,
): number {
  const metric = metricByName(options.metric);
  let total = 0;
  for (const instance of instances) {
    const prompt = encodeText(instance.input);
    const generated = model.generate(prompt, budgets, options.eviction, options.maxNewTokens);
    total += metric(decodeTokens(generated), instance.target);
  }
  return total / instances.length;
}
