/**
 * Task metrics mapping (prediction, target) to [0, 1].
 *
 * Token-level F1 and recall follow the usual QA conventions (multiset
 * overlap of normalized tokens); rougeL is the LCS F-measure; accuracy is
 * normalized exact match; edit_sim is one minus the normalized character
 * edit distance, the usual code-completion similarity.
 */

export type MetricName = "f1" | "accuracy" | "rougeL" | "recall" | "edit_sim";

export const METRIC_NAMES: MetricName[] = ["f1", "accuracy", "rougeL", "recall", "edit_sim"];

export function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .split(/[^a-z0-9]+/)
    .filter((token) => token.length > 0);
}

function overlapCount(prediction: string[], target: string[]): number {
  const counts = new Map<string, number>();
  for (const token of target) counts.set(token, (counts.get(token) ?? 0) + 1);
  let overlap = 0;
  for (const token of prediction) {
    const remaining = counts.get(token) ?? 0;
    if (remaining > 0) {
      overlap += 1;
      counts.set(token, remaining - 1);
    }
  }
  return overlap;
}

export function f1Score(prediction: string, target: string): number {
  const predTokens = tokenize(prediction);
  const targetTokens = tokenize(target);
  if (predTokens.length === 0 && targetTokens.length === 0) return 1;
  if (predTokens.length === 0 || targetTokens.length === 0) return 0;
  const overlap = overlapCount(predTokens, targetTokens);
  if (overlap === 0) return 0;
  const precision = overlap / predTokens.length;
  const recall = overlap / targetTokens.length;
  return (2 * precision * recall) / (precision + recall);
}

export function recallScore(prediction: string, target: string): number {
  const targetTokens = tokenize(target);
  if (targetTokens.length === 0) return 1;
  return overlapCount(tokenize(prediction), targetTokens) / targetTokens.length;
}

export function accuracyScore(prediction: string, target: string): number {
  const normalize = (s: string) => tokenize(s).join(" ");
  return normalize(prediction) === normalize(target) ? 1 : 0;
}

function lcsLength(a: string[], b: string[]): number {
  const table = new Array<number>((a.length + 1) * (b.length + 1)).fill(0);
  const width = b.length + 1;
  for (let i = 1; i <= a.length; i++) {
    for (let j = 1; j <= b.length; j++) {
      table[i * width + j] =
        a[i - 1] === b[j - 1]
          ? table[(i - 1) * width + j - 1] + 1
          : Math.max(table[(i - 1) * width + j], table[i * width + j - 1]);
    }
  }
  return table[a.length * width + b.length];
}

export function rougeLScore(prediction: string, target: string): number {
  const predTokens = tokenize(prediction);
  const targetTokens = tokenize(target);
  if (predTokens.length === 0 && targetTokens.length === 0) return 1;
  if (predTokens.length === 0 || targetTokens.length === 0) return 0;
  const lcs = lcsLength(predTokens, targetTokens);
  if (lcs === 0) return 0;
  const precision = lcs / predTokens.length;
  const recall = lcs / targetTokens.length;
  return (2 * precision * recall) / (precision + recall);
}

function editDistance(a: string, b: string): number {
  const previous = new Array<number>(b.length + 1);
  const current = new Array<number>(b.length + 1);
  for (let j = 0; j <= b.length; j++) previous[j] = j;
  for (let i = 1; i <= a.length; i++) {
    current[0] = i;
    for (let j = 1; j <= b.length; j++) {
      const substitution = previous[j - 1] + (a[i - 1] === b[j - 1] ? 0 : 1);
      current[j] = Math.min(previous[j] + 1, current[j - 1] + 1, substitution);
    }
    for (let j = 0; j <= b.length; j++) previous[j] = current[j];
  }
  return previous[b.length];
}

export function editSimScore(prediction: string, target: string): number {
  const longest = Math.max(prediction.length, target.length);
  if (longest === 0) return 1;
  return 1 - editDistance(prediction, target) / longest;
}

const METRICS: Record<MetricName, (prediction: string, target: string) => number> = {
  f1: f1Score,
  accuracy: accuracyScore,
  rougeL: rougeLScore,
  recall: recallScore,
  edit_sim: editSimScore,
};

export function metricByName(name: string): (prediction: string, target: string) => number {
  if (!(name in METRICS)) {
    throw new Error(`unknown metric ${name}; expected one of ${METRIC_NAMES.join(", ")}`);
  }
  return METRICS[name as MetricName];
}
