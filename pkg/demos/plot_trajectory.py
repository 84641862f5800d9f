"""Render a search trajectory CSV as a best-so-far curve.

Usage: python demos/plot_trajectory.py [trajectory.csv] [out.png]

Plots per-candidate shaped fitness (scatter) under the running incumbent
value (line), with group boundaries marked. Defaults to the CSV written by
03_optimize_synthetic.py.
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "trajectory.csv"
out = Path(sys.argv[2]) if len(sys.argv) > 2 else path.with_suffix(".png")

with open(path) as handle:
    rows = list(csv.DictReader(handle))

evals = [int(r["evaluation_index"]) for r in rows]
shaped = [float(r["shaped_fitness"]) for r in rows]
best = [float(r["best_so_far"]) for r in rows]
groups = [int(r["group_index"]) for r in rows]

fig, ax = plt.subplots(figsize=(8, 4.5))
ax.scatter(evals, shaped, s=4, alpha=0.25, color="tab:gray", label="candidates")
ax.plot(evals, best, color="tab:blue", lw=2, label="best so far")
for i in range(1, len(rows)):
    if groups[i] != groups[i - 1]:
        ax.axvline(evals[i], color="tab:orange", ls=":", lw=1)
ax.set_xlabel("evaluation")
ax.set_ylabel("shaped fitness")
ax.set_title("budget search trajectory (dotted lines: new layer group)")
ax.legend(loc="lower right")
fig.tight_layout()
fig.savefig(out, dpi=130)
print(f"wrote {out}")
