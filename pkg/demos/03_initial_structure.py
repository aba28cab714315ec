"""
What the initial ring looks like
================================

Outcomes are decided early by rare local patterns in the random start: unhappy
nodes, windows that are already stable, and windows that can never be won.
This script computes their exact probabilities and counts them on a sampled
ring.
"""

# %%
from schelling1d.probe import probe, probe_monte_carlo
from schelling1d.ring import Color, Scenario, init_ring
from schelling1d.structure import census, find_firewalls, find_stable_intervals

scenario = Scenario(0.48, "0.38", "0.46")
w = 20
exact = probe(scenario, w).probabilities()
sampled = probe_monte_carlo(scenario, w, 200_000, seed=0)
for key, p in exact.items():
    print(f"{key:>14}: exact {p:.3e}   sampled {sampled[key]:.3e}")

# %%
# The same quantities counted directly on one ring.
ring = init_ring(200_000, w, scenario.rho, seed=0)
c = census(ring, scenario)
print(f"unhappy greens {c.unhappy_green}, unhappy reds {c.unhappy_red}, "
      f"stable green windows {c.stable_green}, stable red windows {c.stable_red}")

# %%
# Long one-colour runs never change once they exceed the neighbourhood.
walls = find_firewalls(ring, Color.GREEN)
stable = find_stable_intervals(ring, scenario, Color.GREEN)
print(f"{len(walls)} green runs longer than w, {len(stable)} stable green windows")
