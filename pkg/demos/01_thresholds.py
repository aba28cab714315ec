"""
Thresholds and predictions
==========================

The limiting behaviour of the ring depends on how the two tolerances sit
relative to a handful of curves in rho. This script prints those curves for a
few green shares, locates the share where the stability threshold meets the
domination boundary, and asks the classifier about some scenarios.
"""

# %%
# Stability thresholds. Below kappa a colour keeps its initial layout almost
# everywhere; above mu its members can no longer find a stable home.
from schelling1d.thresholds import classify, domination_report, lambda_threshold, thresholds
from schelling1d.ring import Scenario

for rho in (0.3, 0.42, 0.5, 0.6, 0.7):
    t = thresholds(rho)
    print(f"rho={rho:.2f}  kappa_g={t.kappa_g:.4f} kappa_r={t.kappa_r:.4f} "
          f"mu_g={t.mu_g:.4f} mu_r={t.mu_r:.4f}")

# %%
# The green share at which red's stability threshold lies on the domination
# boundary. The residual of the mirrored boundary is reported, not forced to 0.
lam = lambda_threshold()
print(f"lambda={lam.value:.8f}  kappa_g={lam.kappa_g:.6f} kappa_r={lam.kappa_r:.6f} "
      f"mirrored residual={lam.dual_residual:.4f}")

# %%
# Which colour dominates when both are tolerant enough to move.
s = Scenario(0.48, "0.38", "0.46")
rep = domination_report(s.rho, s.tau_g, s.tau_r)
print(s, "->", rep.kind.value, f"margin {rep.margin:.4f}")

# %%
# Predicted outcomes with the rule that produced them.
for scen, dyn in [(Scenario(0.2, "0.25", "0.65"), "selective"),
                  (Scenario(0.48, "0.38", "0.46"), "selective"),
                  (Scenario(0.4, "0.65", "0.75"), "selective"),
                  (Scenario(0.5, "0.6", "0.7"), "synchronous"),
                  (Scenario(0.3, "0.13", "0.49"), "selective")]:
    p = classify(scen, dyn)
    extra = f" (Z at the limit {p.z_limit:.4f})" if p.z_limit is not None else ""
    print(f"{scen} {dyn}: {p.label.value}: {p.reason}{extra}")
