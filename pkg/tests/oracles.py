"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np


def green_counts(colors, w):
    n = len(colors)
    return np.array([sum(int(colors[(x + d) % n]) for d in range(-w, w + 1)) for x in range(n)])


def status(colors, w, tau_g: Fraction, tau_r: Fraction):
    """0 happy, 1 unhappy without hope, 2 unhappy but happy after switching."""
    W = 2 * w + 1
    out = []
    for x, g in enumerate(green_counts(colors, w)):
        if colors[x] == 1:
            happy = Fraction(g, W) >= tau_g
            hopeful = Fraction(W - g + 1, W) >= tau_r
        else:
            happy = Fraction(W - g, W) >= tau_r
            hopeful = Fraction(g + 1, W) >= tau_g
        out.append(0 if happy else 2 if hopeful else 1)
    return np.array(out)


def window(colors, a, length):
    n = len(colors)
    return [int(colors[(a + d) % n]) for d in range(length)]


def stable_starts(colors, w, tau: Fraction, color: int):
    W = 2 * w + 1
    return [a for a in range(len(colors))
            if Fraction(window(colors, a, w + 1).count(color), W) >= tau]


def intractable_starts(colors, w, tau: Fraction, color: int):
    W = 2 * w + 1
    return [a for a in range(len(colors))
            if window(colors, a, w + 1).count(color) < tau * W - (w + 1)]


def firewalls(colors, color: int, min_length: int):
    """(start, length) of maximal runs of `color`, walking the cycle node by node."""
    n = len(colors)
    if all(c == color for c in colors):
        return [(0, n)]
    out = []
    for a in range(n):
        if colors[a] == color and colors[(a - 1) % n] != color:
            m = 0
            while colors[(a + m) % n] == color:
                m += 1
            if m >= min_length:
                out.append((a, m))
    return out


def binom_at_least(N: int, p: Fraction, k: int) -> Fraction:
    return sum((comb(N, j) * p**j * (1 - p) ** (N - j) for j in range(max(k, 0), N + 1)),
               Fraction(0))
