"""Detectors for the structures that decide a ring's fate, and run summaries."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .dynamics import RunRecord, Termination
from .ring import Color, Ring, Scenario


@dataclass(frozen=True)
class Interval:
    """Nodes start, start+1, ..., start+length-1 (mod n)."""
    kind: str
    color: Color
    start: int
    length: int


def window_counts(colors: np.ndarray, length: int) -> np.ndarray:
    """out[a] = number of green nodes in [a, a + length - 1] (mod n)."""
    n = colors.shape[0]
    ext = np.concatenate((colors, colors[: length - 1])).astype(np.int64)
    csum = np.concatenate(([0], np.cumsum(ext)))
    return csum[length:length + n] - csum[:n]


def _color_counts(ring: Ring, color: Color, length: int) -> np.ndarray:
    g = window_counts(ring.colors, length)
    return g if color == Color.GREEN else length - g


def stable_starts(ring: Ring, scenario: Scenario, color: Color) -> np.ndarray:
    """Starts a of windows [a, a+w] in which color makes up at least tau of a neighbourhood.

    Every member of such a window then has enough of its own colour without looking
    outside, so the window can never change.
    """
    tau = scenario.tau(color)
    c = _color_counts(ring, color, ring.w + 1)
    return np.flatnonzero(tau.denominator * c >= tau.numerator * ring.W)


def intractable_starts(ring: Ring, scenario: Scenario, color: Color) -> np.ndarray:
    """Starts a of windows [a, a+w] too short of color for the other colour's nodes in
    them to ever become hopeful of switching to it.

    For green: den * G(J) < num * W - den * (w + 1) with tau_g = num/den.
    """
    tau = scenario.tau(color)
    c = _color_counts(ring, color, ring.w + 1)
    return np.flatnonzero(tau.denominator * c < tau.numerator * ring.W
                          - tau.denominator * (ring.w + 1))


def find_stable_intervals(ring: Ring, scenario: Scenario, color: Color) -> list[Interval]:
    return [Interval("stable", color, int(a), ring.w + 1)
            for a in stable_starts(ring, scenario, color)]


def find_intractable_intervals(ring: Ring, scenario: Scenario, color: Color) -> list[Interval]:
    return [Interval("intractable", color, int(a), ring.w + 1)
            for a in intractable_starts(ring, scenario, color)]


def monochrome_runs(colors: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Maximal runs of one colour around the cycle: (starts, lengths, colours).

    A ring of a single colour is one run of length n starting at 0.
    """
    colors = np.asarray(colors)
    n = colors.shape[0]
    edges = np.flatnonzero(colors != np.roll(colors, 1))
    if edges.size == 0:
        return np.array([0]), np.array([n]), colors[:1].copy()
    lengths = np.diff(np.concatenate((edges, [edges[0] + n])))
    return edges, lengths, colors[edges]


def find_firewalls(ring: Ring, color: Color, min_length: int | None = None) -> list[Interval]:
    """Maximal runs of `color` of length at least min_length (default w + 1)."""
    min_length = ring.w + 1 if min_length is None else min_length
    starts, lengths, cols = monochrome_runs(ring.colors)
    keep = (cols == int(color)) & (lengths >= min_length)
    return [Interval("firewall", color, int(s), int(m))
            for s, m in zip(starts[keep], lengths[keep])]


@dataclass(frozen=True)
class Census:
    happy_green: int
    happy_red: int
    unhappy_green: int
    unhappy_red: int
    hopeful_green: int
    hopeful_red: int
    stable_green: int
    stable_red: int
    intractable_green: int
    intractable_red: int

    @property
    def unhappy(self) -> int:
        return self.unhappy_green + self.unhappy_red

    @property
    def hopeful(self) -> int:
        return self.hopeful_green + self.hopeful_red


def status_codes(ring: Ring, scenario: Scenario) -> np.ndarray:
    """Status of every node (0 happy, 1 hopeless, 2 hopeful) from the counts alone."""
    need_g, need_r = scenario.needs(ring.w)
    g = ring.green_counts
    W = ring.W
    green = ring.colors == 1
    happy = np.where(green, g >= need_g, W - g >= need_r)
    hopeful = ~happy & np.where(green, W - g + 1 >= need_r, g + 1 >= need_g)
    return np.where(happy, K.HAPPY, np.where(hopeful, K.HOPEFUL, K.HOPELESS)).astype(np.int8)


def census(ring: Ring, scenario: Scenario) -> Census:
    st = status_codes(ring, scenario)
    green = ring.colors == 1
    ng = int(green.sum())
    happy_g = int(np.count_nonzero(green & (st == K.HAPPY)))
    happy_r = int(np.count_nonzero(~green & (st == K.HAPPY)))
    hope_g = int(np.count_nonzero(green & (st == K.HOPEFUL)))
    hope_r = int(np.count_nonzero(~green & (st == K.HOPEFUL)))
    return Census(happy_green=happy_g, happy_red=happy_r,
                  unhappy_green=ng - happy_g, unhappy_red=ring.n - ng - happy_r,
                  hopeful_green=hope_g, hopeful_red=hope_r,
                  stable_green=len(stable_starts(ring, scenario, Color.GREEN)),
                  stable_red=len(stable_starts(ring, scenario, Color.RED)),
                  intractable_green=len(intractable_starts(ring, scenario, Color.GREEN)),
                  intractable_red=len(intractable_starts(ring, scenario, Color.RED)))


def nodes_at_density(ring: Ring, theta: Fraction) -> np.ndarray:
    """Nodes whose neighbourhood green share equals theta exactly."""
    theta = Fraction(theta)
    return np.flatnonzero(theta.denominator * ring.green_counts == theta.numerator * ring.W)


@dataclass(frozen=True)
class RunSummary:
    n: int
    steps: int
    termination: Termination
    cycle_period: int | None
    initial_green_fraction: float
    final_green_fraction: float
    changed_fraction: float
    all_green: bool
    all_red: bool


def run_statistics(record: RunRecord) -> RunSummary:
    n = record.n
    g0 = int(record.initial_colors.sum(dtype=np.int64))
    g1 = int(record.final_colors.sum(dtype=np.int64))
    return RunSummary(n=n, steps=record.steps, termination=record.termination,
                      cycle_period=record.cycle_period, initial_green_fraction=g0 / n,
                      final_green_fraction=g1 / n, changed_fraction=record.changed_count / n,
                      all_green=g1 == n, all_red=g1 == 0)
