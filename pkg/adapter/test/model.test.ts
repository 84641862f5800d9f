import { describe, expect, it } from "vitest";

import { TinyCausalLM } from "../src/model.js";
import { loadInstances, scoreInstances } from "../src/scoring.js";
import { decodeTokens, encodeText } from "../src/tokenizer.js";

const PARAMS = { windowSize: 4, kernelSize: 7 };
const PROMPT = encodeText(
  "The capital of France is Paris. The capital of Italy is Rome. Q: What is the capital of France? A:",
);

describe("tokenizer", () => {
  it("round-trips printable ascii and newlines", () => {
    const text = "Hello, world! 123\n";
    expect(decodeTokens(encodeText(text))).toBe(text);
  });

  it("folds unknown characters to ?", () => {
    expect(decodeTokens(encodeText("café"))).toBe("caf?");
  });
});

describe("TinyCausalLM", () => {
  it("generates deterministically for a fixed seed", () => {
    const a = new TinyCausalLM().generate(PROMPT, null, PARAMS, 12);
    const b = new TinyCausalLM().generate(PROMPT, null, PARAMS, 12);
    expect(a).toEqual(b);
  });

  it("different seeds give different weights", () => {
    const a = new TinyCausalLM().generate(PROMPT, null, PARAMS, 12);
    const b = new TinyCausalLM({ layers: 4, heads: 2, dModel: 32, ffn: 64, maxPositions: 1024, seed: 99 })
      .generate(PROMPT, null, PARAMS, 12);
    expect(a).not.toEqual(b);
  });

  it("eviction trims each layer cache to its budget, keeping the window", () => {
    const model = new TinyCausalLM();
    const state = model.newState();
    for (const token of PROMPT) model.step(state, token);
    const before = state.layers.map((l) => l.keys.length);
    expect(before).toEqual([PROMPT.length, PROMPT.length, PROMPT.length, PROMPT.length]);

    model.evictToBudgets(state, [16, 24, PROMPT.length + 50, 8], PARAMS);
    expect(state.layers.map((l) => l.keys.length)).toEqual([16, 24, PROMPT.length, 8]);
    // the most recent window positions survive in every compressed layer
    for (const layer of [0, 1, 3]) {
      const kept = state.layers[layer].positions;
      for (let w = PROMPT.length - PARAMS.windowSize; w < PROMPT.length; w++) {
        expect(kept).toContain(w);
      }
      expect([...kept].sort((x, y) => x - y)).toEqual(kept); // original order preserved
    }
  });

  it("roomy budgets reproduce the no-eviction generation exactly", () => {
    const model = new TinyCausalLM();
    const unconstrained = model.generate(PROMPT, null, PARAMS, 16);
    const roomy = model.generate(PROMPT, [4096, 4096, 4096, 4096], PARAMS, 16);
    expect(roomy).toEqual(unconstrained);
  });

  it("tight budgets actually change the generation", () => {
    const model = new TinyCausalLM();
    const unconstrained = model.generate(PROMPT, null, PARAMS, 16);
    const tight = model.generate(PROMPT, [8, 8, 8, 8], PARAMS, 16);
    expect(tight).not.toEqual(unconstrained);
  });
});

describe("scoreInstances", () => {
  const instances = loadInstances(new URL("../tasks/toy.jsonl", import.meta.url).pathname, 5);

  it("loads at most maxInstances", () => {
    expect(instances).toHaveLength(5);
    expect(instances[0].target).toBe("Paris");
  });

  it("full-context budgets score identically to no eviction on 5 instances", () => {
    const model = new TinyCausalLM();
    const options = { metric: "edit_sim", eviction: PARAMS, maxNewTokens: 16 };
    const reference = scoreInstances(model, instances, null, options);
    const fullContext = scoreInstances(model, instances, [4096, 4096, 4096, 4096], options);
    expect(fullContext).toBe(reference); // exact, not approximate
  });

  it("is deterministic across calls", () => {
    const model = new TinyCausalLM();
    const options = { metric: "edit_sim", eviction: PARAMS, maxNewTokens: 16 };
    const budgets = [16, 16, 16, 16];
    expect(scoreInstances(model, instances, budgets, options)).toBe(
      scoreInstances(model, instances, budgets, options),
    );
  });
});
