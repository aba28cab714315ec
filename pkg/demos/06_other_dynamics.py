"""
Other update rules
==================

Besides moving one happy-after-switching node at a time, the ring can update
every unhappy node at once, move any unhappy node, or add rare random flips.
"""

# %%
from schelling1d.dynamics import simulate
from schelling1d.ring import Scenario
from schelling1d.structure import run_statistics
from schelling1d.thresholds import stochastically_stable

scenario = Scenario(0.5, "0.6", "0.7")
for dynamic in ("selective", "incremental", "synchronous"):
    s = run_statistics(simulate(20_000, 30, scenario, dynamic, seed=2, record_events=False))
    cycle = f" (period {s.cycle_period})" if s.cycle_period else ""
    print(f"{dynamic:>12}: {s.termination.value}{cycle}, final green share "
          f"{s.final_green_fraction:.3f}")

# %%
# With noise the ring never settles; the long-run state favours the colour
# that is harder to dislodge.
noisy = run_statistics(simulate(2000, 10, scenario, "perturbed:0.001", seed=2,
                                max_steps=200_000, record_events=False))
print(f"perturbed: green share {noisy.final_green_fraction:.3f} after {noisy.steps} steps; "
      f"stochastically stable: {stochastically_stable(scenario, 10)}")
