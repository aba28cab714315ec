"""
One run, start to finish
========================

A ring of 20 000 nodes with a small green minority whose members are content
with a quarter of green neighbours, while reds want two thirds red. Unhappy
greens leave first, but the few reds that start unhappy seed green regions
that cannot be pushed back, and green ends up everywhere.
"""

# %%
import sys
from pathlib import Path

from schelling1d.dynamics import simulate
from schelling1d.render import render_ring
from schelling1d.ring import Scenario
from schelling1d.structure import run_statistics

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
out.mkdir(exist_ok=True)

scenario = Scenario(0.2, "0.25", "0.65")
record = simulate(20_000, 40, scenario, "selective", seed=1)
stats = run_statistics(record)
print(f"{stats.steps} flips, ended {stats.termination.value}")
print(f"green share {stats.initial_green_fraction:.3f} -> {stats.final_green_fraction:.3f}, "
      f"{stats.changed_fraction:.1%} of nodes changed colour at least once")

# %%
# Radial history: initial colours inside, then the initially unhappy nodes,
# then each change at a radius growing with its time, then the final colours.
render_ring(record, out / "takeover_ring.svg")
print("wrote", out / "takeover_ring.svg")

# %%
# Runs are reproducible from (n, w, scenario, dynamic, seed).
again = simulate(20_000, 40, scenario, "selective", seed=1)
assert (again.event_node == record.event_node).all()
