"""Regenerate the committed synthetic task fixture.

The fixture is a 32-layer saturating task with a mid-depth importance peak,
heavy-tailed per-layer variation, and saturation constants spanning [16, 512]
tokens. High-importance layers saturate slowly (they reward budget), the rest
saturate within a few dozen tokens (extra budget is wasted on them), which
gives the optimizer a real reallocation problem with a known exact optimum.

Running this script rewrites src/evolkv/fixtures/midpeak32.json in place;
the output is byte-stable for a fixed numpy version.
"""

import json
from pathlib import Path

import numpy as np

from evolkv.evaluators import SaturatingTaskModel

L = 32

rng = np.random.default_rng(20250810)
idx = np.arange(L)
bump = 1.9 * np.exp(-((idx - 15.5) / 5.5) ** 2)  # mid-depth importance peak
heavy = rng.pareto(3.0, L) * 0.25  # heavy-tailed layer-to-layer variation
weights = 0.35 + bump + heavy

# Saturation speed tied to importance: the heaviest layers keep rewarding
# budget far past the per-layer target, everything else saturates fast.
order = np.argsort(-weights)
tau = np.empty(L)
tau[order[:4]] = rng.uniform(250.0, 512.0, 4)
tau[order[4:16]] = rng.uniform(40.0, 170.0, 12)
tau[order[16:]] = rng.uniform(16.0, 40.0, 16)

model = SaturatingTaskModel(
    weights=tuple(np.round(weights, 6)),
    time_constants=tuple(np.round(tau, 3)),
    noise_std=0.0,
    rng_seed=1234,
)

out = Path(__file__).resolve().parent.parent / "src" / "evolkv" / "fixtures" / "midpeak32.json"
out.parent.mkdir(parents=True, exist_ok=True)
out.write_text(json.dumps(model.to_json_dict(), indent=2) + "\n")
print(f"wrote {out}")
print(f"weight mass on layers 8-23: {sum(model.weights[8:24]):.3f}")
print(f"tau range: [{min(model.time_constants)}, {max(model.time_constants)}]")
