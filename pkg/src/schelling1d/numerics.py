"""Scalar numerics: the tail-shape functions, the domination ratio, binomial tails
and a guarded bisection.

Everything here works on plain floats and is evaluated in log space where the
closed forms involve large powers.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from typing import Callable

from scipy import optimize

# Band around the line x + y = 1 inside which the domination ratio is replaced
# by its continuous extension.
LINE_BAND = 1e-6


def _xlogx(t: float) -> float:
    return 0.0 if t == 0.0 else t * math.log(t)


def _entropy_term(t: float) -> float:
    """t ln t + (1 - t) ln(1 - t), with 0 ln 0 = 0."""
    return _xlogx(t) + _xlogx(1.0 - t)


def log_f(s: float) -> float:
    """Natural log of f on [0, 1/2], with f(0) = 1/2 and f(1/2) = 2 as limits."""
    if not 0.0 <= s <= 0.5:
        raise ValueError(f"s={s} outside [0, 1/2]")
    a = 0.5 - s
    head = 0.0 if a == 0.0 else (1.0 - 2.0 * s) * math.log(a)
    return head - 2.0 * (1.0 - s) * math.log1p(-s)


def eval_f(s: float) -> float:
    """f(s) = (1/2 - s)^(1-2s) / (1-s)^(2(1-s)) for s in (0, 1/2].

    Increasing on the domain, from 1/2 at s -> 0 up to 2 at s = 1/2.
    """
    if not 0.0 < s <= 0.5:
        raise ValueError(f"eval_f needs s in (0, 1/2], got {s}")
    return math.exp(log_f(s))


def eval_g(x: float) -> float:
    """g(x) = (x - 1/2)^(2x-1) / x^(2x) for x in [1/2, 1).

    Evaluated from its own closed form; it coincides with f(1 - x).
    """
    if not 0.5 <= x < 1.0:
        raise ValueError(f"eval_g needs x in [1/2, 1), got {x}")
    a = x - 0.5
    head = 0.0 if a == 0.0 else (2.0 * x - 1.0) * math.log(a)
    return math.exp(head - 2.0 * x * math.log(x))


def log_h(x: float, y: float) -> tuple[float, bool]:
    """Log of the domination ratio h(x, y) and whether the line extension was used.

    h(x, y) = exp([ent(x) - ent(y)] / (1 - x - y)) with ent(t) = t ln t + (1-t) ln(1-t).
    The quotient is 0/0 on x + y = 1. Within LINE_BAND of that line we use
    ln(c / (1 - c)) with c = (1 - x + y) / 2, which is the first-order value of
    the quotient at the midpoint, stays exactly antisymmetric under (x, y) -> (y, x)
    and reduces to ln((1 - x) / x) on the line itself.
    """
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
        raise ValueError(f"log_h needs x, y in (0, 1), got {x}, {y}")
    gap = 1.0 - (x + y)
    if abs(gap) < LINE_BAND:
        c = 0.5 * (1.0 - x + y)
        return math.log(c) - math.log1p(-c), True
    return (_entropy_term(x) - _entropy_term(y)) / gap, False


def eval_h(x: float, y: float) -> float:
    return math.exp(log_h(x, y)[0])


def eval_Z(theta: float, rho: float) -> float:
    """Z(theta, rho) = 1 + theta^3 - 3 theta^2 + 3 theta^2 rho - 2 theta^3 rho."""
    t2 = theta * theta
    return 1.0 + t2 * theta - 3.0 * t2 + 3.0 * t2 * rho - 2.0 * t2 * theta * rho


def bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
           max_iter: int = 200) -> float:
    """Root of fn on [lo, hi] by bisection, to bracket width tol.

    Raises ValueError when the endpoints do not bracket a sign change or fn
    returns a non-finite value anywhere along the way.
    """

    def guarded(t: float) -> float:
        v = fn(t)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} at {t}")
        return v

    flo, fhi = guarded(lo), guarded(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    return optimize.bisect(guarded, lo, hi, xtol=tol, rtol=4 * sys.float_info.epsilon, maxiter=max_iter)


# -- binomial tails ---------------------------------------------------------------

class TailDirection(enum.Enum):
    AT_LEAST = "at_least"
    AT_MOST = "at_most"
    GREATER_THAN = "greater_than"


@dataclass(frozen=True)
class TailQuery:
    trials: int
    success_prob: float
    cutoff: int
    direction: TailDirection = TailDirection.AT_LEAST


# ln(n!) - ln(sqrt(2 pi n) (n/e)^n) for n = 0..15
_STIRLERR = (
    0.0,
    0.08106146679532725822,
    0.041340695955409294094,
    0.027677925684998339149,
    0.020790672103765093112,
    0.016644691189821192163,
    0.013876128823070747999,
    0.011896709945891770095,
    0.010411265261972096497,
    0.0092554621827127329177,
    0.0083305634333628712565,
    0.007573675487951840795,
    0.0069428401072095298657,
    0.0064089941880042070684,
    0.0059513701127588477356,
    0.005554733551962801371,
)


def _stirlerr(n: int) -> float:
    if n <= 15:
        return _STIRLERR[n]
    nn = float(n) * n
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, m: float) -> float:
    """x ln(x/m) + m - x, without cancellation when x is close to m."""
    if abs(x - m) < 0.1 * (x + m):
        v = (x - m) / (x + m)
        s = (x - m) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / m) + m - x


def log_binom_pmf(k: int, n: int, p: float) -> float:
    """ln P(X = k) for X ~ b(n, p), via the saddle-point expansion."""
    q = 1.0 - p
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if q == 0.0:
        return 0.0 if k == n else -math.inf
    if k == 0:
        return -_bd0(n, n * q) - n * p if p < 0.1 else n * math.log1p(-p)
    if k == n:
        return -_bd0(n, n * p) - n * q if q < 0.1 else n * math.log(p)
    lc = _stirlerr(n) - _stirlerr(k) - _stirlerr(n - k) - _bd0(k, n * p) - _bd0(n - k, n * q)
    lf = math.log(2 * math.pi) + math.log(k) + math.log1p(-k / n)
    return lc - 0.5 * lf


def _log_upper(n: int, p: float, k: int) -> float:
    """ln P(X >= k), summing upward from k. Accurate when k is above the mode."""
    q = 1.0 - p
    ratio = p / q
    terms = [1.0]
    t = 1.0
    for j in range(k, n):
        t *= (n - j) / (j + 1) * ratio
        terms.append(t)
        if t < 1e-18 * terms[0]:
            break
    return log_binom_pmf(k, n, p) + math.log(math.fsum(terms))


def _log_lower(n: int, p: float, k: int) -> float:
    """ln P(X <= k), summing downward from k. Accurate when k is below the mode."""
    q = 1.0 - p
    ratio = q / p
    terms = [1.0]
    t = 1.0
    for j in range(k, 0, -1):
        t *= j / (n - j + 1) * ratio
        terms.append(t)
        if t < 1e-18 * terms[0]:
            break
    return log_binom_pmf(k, n, p) + math.log(math.fsum(terms))


def log_prob_at_least(n: int, p: float, k: int) -> float:
    """ln P(X >= k) for X ~ b(n, p)."""
    if k <= 0:
        return 0.0
    if k > n:
        return -math.inf
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return 0.0
    mode = math.floor((n + 1) * p)
    if k > mode:
        return _log_upper(n, p, k)
    return math.log1p(-math.exp(_log_lower(n, p, k - 1)))


def log_prob_at_most(n: int, p: float, k: int) -> float:
    """ln P(X <= k) for X ~ b(n, p)."""
    if k < 0:
        return -math.inf
    if k >= n:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return -math.inf
    mode = math.floor((n + 1) * p)
    if k < mode:
        return _log_lower(n, p, k)
    return math.log1p(-math.exp(_log_upper(n, p, k + 1)))


def _check_query(q: TailQuery) -> None:
    if q.trials < 0:
        raise ValueError(f"trials must be >= 0, got {q.trials}")
    if not 0.0 <= q.success_prob <= 1.0:
        raise ValueError(f"success_prob must lie in [0, 1], got {q.success_prob}")
    if not -1 <= q.cutoff <= q.trials:
        raise ValueError(f"cutoff {q.cutoff} outside [-1, {q.trials}]")


def log_binom_tail(query: TailQuery) -> float:
    _check_query(query)
    n, p, k = query.trials, query.success_prob, query.cutoff
    if query.direction is TailDirection.AT_LEAST:
        return log_prob_at_least(n, p, k)
    if query.direction is TailDirection.GREATER_THAN:
        return log_prob_at_least(n, p, k + 1)
    return log_prob_at_most(n, p, k)


def binom_tail(query: TailQuery) -> float:
    """Exact-to-double binomial tail probability.

    The starting probability mass comes from a saddle-point expansion and the
    rest of the tail from the term ratio recurrence, summed with fsum. The heavy
    side is obtained as a complement, so both small and large tails keep their
    relative accuracy.
    """
    return math.exp(log_binom_tail(query))
