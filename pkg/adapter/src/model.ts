/**
 * A tiny causal transformer with a per-layer KV cache, sized to run on CPU
 * in milliseconds. Weights are deterministic functions of a seed (there is
 * no checkpoint to download), so generation is reproducible and the
 * eviction-disabled limit can be tested exactly. The KV mechanics are real:
 * multi-head attention over cached entries, incremental decoding, and
 * window-based cache compression between prefill and decode.
 */

import { maxPool1d, topIndicesSorted } from "./eviction.js";
import { gaussian, mulberry32 } from "./rng.js";
import { STOP_TOKEN, VOCAB_SIZE } from "./tokenizer.js";

export interface ModelConfig {
  layers: number;
  heads: number;
  dModel: number;
  ffn: number;
  maxPositions: number;
  seed: number;
}

export const DEFAULT_MODEL: ModelConfig = {
  layers: 4,
  heads: 2,
  dModel: 32,
  ffn: 64,
  maxPositions: 1024,
  seed: 7,
};

export interface EvictionParams {
  windowSize: number;
  kernelSize: number;
}

interface LayerWeights {
  wq: Float64Array;
  wk: Float64Array;
  wv: Float64Array;
  wo: Float64Array;
  ln1Gain: Float64Array;
  ln1Bias: Float64Array;
  ln2Gain: Float64Array;
  ln2Bias: Float64Array;
  w1: Float64Array; // dModel -> ffn
  w2: Float64Array; // ffn -> dModel
}

interface LayerCache {
  keys: Float64Array[];
  values: Float64Array[];
  /** absolute step index of each retained cache entry */
  positions: number[];
  /** query vectors recorded during prefill, for eviction scoring */
  prefillQueries: Float64Array[];
}

export interface DecodeState {
  position: number;
  recording: boolean;
  layers: LayerCache[];
}

function matvec(weight: Float64Array, x: Float64Array, rows: number, cols: number): Float64Array {
  const out = new Float64Array(rows);
  for (let r = 0; r < rows; r++) {
    let acc = 0;
    const base = r * cols;
    for (let c = 0; c < cols; c++) acc += weight[base + c] * x[c];
    out[r] = acc;
  }
  return out;
}

function layerNorm(x: Float64Array, gain: Float64Array, bias: Float64Array): Float64Array {
  const n = x.length;
  let mean = 0;
  for (let i = 0; i < n; i++) mean += x[i];
  mean /= n;
  let variance = 0;
  for (let i = 0; i < n; i++) variance += (x[i] - mean) ** 2;
  variance /= n;
  const inv = 1.0 / Math.sqrt(variance + 1e-5);
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) out[i] = (x[i] - mean) * inv * gain[i] + bias[i];
  return out;
}

function gelu(x: number): number {
  return 0.5 * x * (1 + Math.tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
}

export class TinyCausalLM {
  readonly config: ModelConfig;
  private readonly embedding: Float64Array; // vocab x dModel, tied with unembedding
  private readonly positional: Float64Array; // maxPositions x dModel
  private readonly layers: LayerWeights[];
  private readonly lnFinalGain: Float64Array;
  private readonly lnFinalBias: Float64Array;

  constructor(config: ModelConfig = DEFAULT_MODEL) {
    if (config.dModel % config.heads !== 0) {
      throw new Error("dModel must be divisible by heads");
    }
    this.config = config;
    const normal = gaussian(mulberry32(config.seed));
    const init = (size: number, scale: number) => {
      const out = new Float64Array(size);
      for (let i = 0; i < size; i++) out[i] = normal() * scale;
      return out;
    };
    const d = config.dModel;
    const attnScale = 1.0 / Math.sqrt(d);
    this.embedding = init(VOCAB_SIZE * d, 0.1);
    this.positional = init(config.maxPositions * d, 0.1);
    this.layers = [];
    for (let l = 0; l < config.layers; l++) {
      this.layers.push({
        wq: init(d * d, attnScale),
        wk: init(d * d, attnScale),
        wv: init(d * d, attnScale),
        wo: init(d * d, attnScale),
        ln1Gain: new Float64Array(d).fill(1),
        ln1Bias: new Float64Array(d),
        ln2Gain: new Float64Array(d).fill(1),
        ln2Bias: new Float64Array(d),
        w1: init(config.ffn * d, attnScale),
        w2: init(d * config.ffn, 1.0 / Math.sqrt(config.ffn)),
      });
    }
    this.lnFinalGain = new Float64Array(d).fill(1);
    this.lnFinalBias = new Float64Array(d);
  }

  get layerCount(): number {
    return this.config.layers;
  }

  newState(): DecodeState {
    return {
      position: 0,
      recording: true,
      layers: Array.from({ length: this.config.layers }, () => ({
        keys: [],
        values: [],
        positions: [],
        prefillQueries: [],
      })),
    };
  }

  /** Process one token, append to every layer's cache, return the logits. */
  step(state: DecodeState, tokenId: number): Float64Array {
    const { dModel: d, heads } = this.config;
    const headDim = d / heads;
    if (state.position >= this.config.maxPositions) {
      throw new Error("sequence exceeds maxPositions");
    }
    let x = new Float64Array(d);
    for (let i = 0; i < d; i++) {
      x[i] = this.embedding[tokenId * d + i] + this.positional[state.position * d + i];
    }

    for (let l = 0; l < this.config.layers; l++) {
      const weights = this.layers[l];
      const cache = state.layers[l];
      const h = layerNorm(x, weights.ln1Gain, weights.ln1Bias);
      const q = matvec(weights.wq, h, d, d);
      const k = matvec(weights.wk, h, d, d);
      const v = matvec(weights.wv, h, d, d);
      cache.keys.push(k);
      cache.values.push(v);
      cache.positions.push(state.position);
      if (state.recording) cache.prefillQueries.push(q);

      const attnOut = new Float64Array(d);
      const entries = cache.keys.length;
      for (let head = 0; head < heads; head++) {
        const offset = head * headDim;
        const scores = new Float64Array(entries);
        let maxScore = -Infinity;
        for (let t = 0; t < entries; t++) {
          let dot = 0;
          const key = cache.keys[t];
          for (let i = 0; i < headDim; i++) dot += q[offset + i] * key[offset + i];
          scores[t] = dot / Math.sqrt(headDim);
          if (scores[t] > maxScore) maxScore = scores[t];
        }
        let denom = 0;
        for (let t = 0; t < entries; t++) {
          scores[t] = Math.exp(scores[t] - maxScore);
          denom += scores[t];
        }
        for (let t = 0; t < entries; t++) {
          const weight = scores[t] / denom;
          const value = cache.values[t];
          for (let i = 0; i < headDim; i++) attnOut[offset + i] += weight * value[offset + i];
        }
      }
      const projected = matvec(weights.wo, attnOut, d, d);
      for (let i = 0; i < d; i++) x[i] += projected[i];

      const h2 = layerNorm(x, weights.ln2Gain, weights.ln2Bias);
      const inner = matvec(weights.w1, h2, this.config.ffn, d);
      for (let i = 0; i < this.config.ffn; i++) inner[i] = gelu(inner[i]);
      const outer = matvec(weights.w2, inner, d, this.config.ffn);
      for (let i = 0; i < d; i++) x[i] += outer[i];
    }

    const final = layerNorm(x, this.lnFinalGain, this.lnFinalBias);
    const logits = new Float64Array(VOCAB_SIZE);
    for (let t = 0; t < VOCAB_SIZE; t++) {
      let acc = 0;
      for (let i = 0; i < d; i++) acc += this.embedding[t * d + i] * final[i];
      logits[t] = acc;
    }
    state.position += 1;
    return logits;
  }

  /**
   * Compress one layer's cache down to ``budget`` entries: keep the recent
   * observation window plus the prefix positions that window queries attend
   * to most (scores max-pooled along the sequence before the top-k cut).
   */
  private evictLayer(cache: LayerCache, budget: number, params: EvictionParams): void {
    const entries = cache.keys.length;
    if (entries <= budget) return; // nothing to evict
    const { heads, dModel } = this.config;
    const headDim = dModel / heads;
    const window = Math.min(params.windowSize, entries);
    const prefixLen = entries - window;
    const windowQueries = cache.prefillQueries.slice(-window);

    const scores = new Array<number>(prefixLen).fill(0);
    for (let qi = 0; qi < windowQueries.length; qi++) {
      const q = windowQueries[qi];
      const causalLimit = prefixLen + qi; // query at window slot qi saw entries [0, limit]
      for (let head = 0; head < heads; head++) {
        const offset = head * headDim;
        const logits = new Float64Array(causalLimit + 1);
        let maxLogit = -Infinity;
        for (let t = 0; t <= causalLimit; t++) {
          let dot = 0;
          const key = cache.keys[t];
          for (let i = 0; i < headDim; i++) dot += q[offset + i] * key[offset + i];
          logits[t] = dot / Math.sqrt(headDim);
          if (logits[t] > maxLogit) maxLogit = logits[t];
        }
        let denom = 0;
        for (let t = 0; t <= causalLimit; t++) {
          logits[t] = Math.exp(logits[t] - maxLogit);
          denom += logits[t];
        }
        for (let t = 0; t < prefixLen; t++) scores[t] += logits[t] / denom;
      }
    }

    const pooled = maxPool1d(scores, params.kernelSize);
    const keepPrefix = topIndicesSorted(pooled, budget - window);
    const retained = [...keepPrefix, ...Array.from({ length: window }, (_, i) => prefixLen + i)];
    cache.keys = retained.map((i) => cache.keys[i]);
    cache.values = retained.map((i) => cache.values[i]);
    cache.positions = retained.map((i) => cache.positions[i]);
  }

  /** Apply per-layer budgets to the prefill cache (no-op for roomy budgets). */
  evictToBudgets(state: DecodeState, budgets: number[], params: EvictionParams): void {
    if (budgets.length !== this.config.layers) {
      throw new Error(`expected ${this.config.layers} budgets, got ${budgets.length}`);
    }
    for (let l = 0; l < budgets.length; l++) {
      this.evictLayer(state.layers[l], budgets[l], params);
    }
  }

  /**
   * Greedy generation: prefill the prompt, optionally compress each layer's
   * cache to its budget, then decode until the stop token or the cap.
   */
  generate(
    promptTokens: number[],
    budgets: number[] | null,
    params: EvictionParams,
    maxNewTokens: number,
  ): number[] {
    const state = this.newState();
    let logits: Float64Array | null = null;
    for (const token of promptTokens) logits = this.step(state, token);
    if (logits === null) throw new Error("empty prompt");

    if (budgets !== null) this.evictToBudgets(state, budgets, params);
    state.recording = false;

    const generated: number[] = [];
    for (let n = 0; n < maxNewTokens; n++) {
      let best = 0;
      for (let t = 1; t < VOCAB_SIZE; t++) {
        if (logits[t] > logits[best]) best = t;
      }
      if (best === STOP_TOKEN) break;
      generated.push(best);
      logits = this.step(state, best);
    }
    return generated;
  }
}
