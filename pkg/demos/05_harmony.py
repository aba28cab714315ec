"""
Harmony only goes up
====================

For a suitable weight on green agreement, every flip of an unhappy node raises
a weighted count of same-colour neighbours. Since that count is bounded, runs
must end. The monitor checks this exactly, flip by flip.
"""

# %%
from schelling1d.dynamics import harmony_chi, harmony_index, simulate
from schelling1d.ring import Scenario, init_ring

scenario = Scenario(0.5, "0.55", "0.6")
w = 20
chi = harmony_chi(scenario, w)
print(f"weight on green agreement: {chi} (~{float(chi):.4f})")

start = harmony_index(init_ring(5000, w, scenario.rho, seed=4), chi)
record = simulate(5000, w, scenario, "selective", seed=4, monitor=True)
print(f"{len(record.event_time)} flips checked; harmony {float(start):.2f} -> "
      f"{float(record.harmony):.2f}")
