"""Exact initial-configuration probabilities behind the domination comparisons.

All quantities are per node (or per window) in the initial random ring, where
each node is green independently with probability rho.

  unhappy_g   a green node is unhappy
  stable_g    a window [a, a+w] starting at a green node is stably green
  hopeful_r   a red node has enough green neighbours to be happy as green
  intract_g   a window [a, a+w] holds so few greens that no red inside can turn
plus the colour-swapped counterparts.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .numerics import TailDirection, TailQuery, log_binom_tail
from .ring import Scenario, init_ring
from .structure import window_counts


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class ProbeCutoffs:
    unhappy: int     # unhappy iff the other 2w nodes hold at least this many of the other colour
    stable: int      # stable window iff its other w nodes hold at least this many of own colour
    hopeful: int     # a node of the other colour is hopeful iff >= this many of this colour
    intract: int     # window intractable iff at most this many of this colour (-1: impossible)


def cutoffs(tau: Fraction, w: int) -> ProbeCutoffs:
    W = 2 * w + 1
    return ProbeCutoffs(unhappy=_floor((1 - tau) * W) + 1,
                        stable=_ceil(tau * W) - 1,
                        hopeful=_ceil(tau * W) - 1,
                        intract=_ceil((tau - Fraction(1, 2)) * W) - 1)


@dataclass(frozen=True)
class ProbeReport:
    """Natural logs of the probabilities; -inf for an impossible event."""
    log_unhappy_g: float
    log_unhappy_r: float
    log_stable_g: float
    log_stable_r: float
    log_hopeful_g: float
    log_hopeful_r: float
    log_intract_g: float
    log_intract_r: float

    def probabilities(self) -> dict[str, float]:
        return {k[4:]: math.exp(v) for k, v in asdict(self).items()}


def _tail(n: int, p: float, k: int, direction: TailDirection) -> float:
    if direction is TailDirection.AT_LEAST:
        if k <= 0:
            return 0.0
        if k > n:
            return -math.inf
    else:
        if k < 0:
            return -math.inf
        if k >= n:
            return 0.0
    return log_binom_tail(TailQuery(n, p, k, direction))


def probe(scenario: Scenario, w: int) -> ProbeReport:
    rho = scenario.rho
    cg, cr = cutoffs(scenario.tau_g, w), cutoffs(scenario.tau_r, w)
    up, down = TailDirection.AT_LEAST, TailDirection.AT_MOST
    return ProbeReport(
        log_unhappy_g=_tail(2 * w, 1 - rho, cg.unhappy, up),
        log_unhappy_r=_tail(2 * w, rho, cr.unhappy, up),
        log_stable_g=_tail(w, rho, cg.stable, up),
        log_stable_r=_tail(w, 1 - rho, cr.stable, up),
        # a green node is hopeful when enough reds surround it, and vice versa
        log_hopeful_g=_tail(2 * w, 1 - rho, cr.hopeful, up),
        log_hopeful_r=_tail(2 * w, rho, cg.hopeful, up),
        log_intract_g=_tail(w + 1, rho, cg.intract, down),
        log_intract_r=_tail(w + 1, 1 - rho, cr.intract, down),
    )


def probe_monte_carlo(scenario: Scenario, w: int, n: int = 200_000, seed: int = 0
                      ) -> dict[str, float]:
    """Empirical frequencies of the probed events in one random ring of n nodes."""
    ring = init_ring(n, w, scenario.rho, seed)
    colors = ring.colors
    green = colors == 1
    g = ring.green_counts.astype(np.int64)
    others_g = g - colors          # green among the other 2w nodes
    others_r = 2 * w - others_g
    cg, cr = cutoffs(scenario.tau_g, w), cutoffs(scenario.tau_r, w)
    win = window_counts(colors, w + 1)   # greens in [a, a+w]
    rest_g = win - colors                # greens among the last w of the window
    rest_r = w - rest_g
    red = ~green

    def frac(mask, among):
        return float(np.count_nonzero(mask & among)) / max(1, np.count_nonzero(among))

    every = np.ones(n, dtype=bool)
    return {
        "unhappy_g": frac(others_r >= cg.unhappy, green),
        "unhappy_r": frac(others_g >= cr.unhappy, red),
        "stable_g": frac(rest_g >= cg.stable, green),
        "stable_r": frac(rest_r >= cr.stable, red),
        "hopeful_g": frac(others_r >= cr.hopeful, green),
        "hopeful_r": frac(others_g >= cg.hopeful, red),
        "intract_g": frac(win <= cg.intract, every),
        "intract_r": frac((w + 1 - win) <= cr.intract, every),
    }
