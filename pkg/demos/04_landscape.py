"""
An outcome landscape
====================

Sweep the tolerance plane at one green share, label each cell by the majority
outcome over a few seeds, and compare with the classifier. A small grid keeps
this quick; the CLI runs larger ones.
"""

# %%
import sys
from pathlib import Path

from schelling1d.render import render_landscape
from schelling1d.sweep import SweepConfig, agreement, run_sweep, summary_text, write_csv

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
out.mkdir(exist_ok=True)

config = SweepConfig(rho=0.42, w=15, n=10_000, grid=10, reps=2, base_seed=0)
grid = run_sweep(config)
print(summary_text(grid))

# %%
# Cells where the majority outcome is not compatible with the prediction,
# closest to an analytic boundary first.
rep = agreement(grid)
for d in rep.disagreements[:5]:
    print(f"tau_r={float(d.tau_r):.3f} tau_g={float(d.tau_g):.3f}: predicted {d.predicted}, "
          f"observed {d.observed}, {d.distance:.3f} from a boundary")

# %%
with open(out / "landscape.csv", "w") as fh:
    write_csv(grid, fh)
render_landscape(grid, out / "landscape.svg")
print("wrote", out / "landscape.csv", "and", out / "landscape.svg")
