/**
 * Cache-compression selection helpers: sequence-axis max pooling over
 * importance scores and an order-preserving top-k cut.
 */

/** 1-D max pooling with same-length output (odd or even kernel, stride 1). */
export function maxPool1d(scores: number[], kernel: number): number[] {
  if (kernel < 1) throw new Error(`kernel must be >= 1, got ${kernel}`);
  const n = scores.length;
  const half = Math.floor(kernel / 2);
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) {
    let best = -Infinity;
    const lo = Math.max(0, i - half);
    const hi = Math.min(n - 1, i + half);
    for (let j = lo; j <= hi; j++) {
      if (scores[j] > best) best = scores[j];
    }
    out[i] = best;
  }
  return out;
}

/** Indices of the k largest scores, returned in ascending index order. */
export function topIndicesSorted(scores: number[], k: number): number[] {
  if (k <= 0) return [];
  if (k >= scores.length) return scores.map((_, i) => i);
  const order = scores
    .map((score, index) => ({ score, index }))
    .sort((a, b) => b.score - a.score || a.index - b.index)
    .slice(0, k)
    .map((entry) => entry.index);
  order.sort((a, b) => a - b);
  return order;
}
