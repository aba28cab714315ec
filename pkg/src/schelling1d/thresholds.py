"""Analytic thresholds, domination and the outcome classifier."""

from __future__ import annotations

import enum
import re
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .dynamics import Dynamic
from .numerics import bisect, eval_Z, log_f, log_h
from .ring import Scenario, as_tolerance

BAND = 1e-6
BOUNDARY_TOL = 1e-9
ROOT_TOL = 1e-12


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho={rho} outside (0, 1)")
    return rho


@lru_cache(maxsize=4096)
def kappa_g(rho: float) -> float:
    """Green tolerance below which green intervals initially remain stable almost surely.

    Root of f(s) = 1 / (2(1 - rho)) on (0, 1/2) for rho < 3/4, else 1/2.
    """
    rho = _check_rho(rho)
    if rho >= 0.75:
        return 0.5
    target = -math.log(2.0 * (1.0 - rho))
    return bisect(lambda s: log_f(s) - target, 0.0, 0.5, tol=ROOT_TOL)


def kappa_r(rho: float) -> float:
    """Red counterpart of kappa_g: root of f(s) = 1 / (2 rho), 1/2 when rho <= 1/4."""
    return kappa_g(1.0 - _check_rho(rho))


def mu_g(rho: float) -> float:
    return 1.0 - kappa_r(rho)


def mu_r(rho: float) -> float:
    return 1.0 - kappa_g(rho)


@dataclass(frozen=True)
class ThresholdSet:
    rho: float
    kappa_g: float
    kappa_r: float
    mu_g: float
    mu_r: float


def thresholds(rho: float) -> ThresholdSet:
    kg, kr = kappa_g(rho), kappa_r(rho)
    return ThresholdSet(float(rho), kg, kr, 1.0 - kr, 1.0 - kg)


def mu_thresholds(rho: float) -> tuple[float, float]:
    return mu_g(rho), mu_r(rho)


class Domination(enum.Enum):
    RED = "red"
    GREEN = "green"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class DominationReport:
    kind: Domination
    margin: float          # ln((1-rho)/rho) - ln h; positive means red dominates
    line_extended: bool    # the ratio was taken from its extension near tau_g + tau_r = 1


def domination_report(rho: float, tau_g, tau_r) -> DominationReport:
    rho = _check_rho(rho)
    lh, ext = log_h(float(tau_g), float(tau_r))
    margin = math.log((1.0 - rho) / rho) - lh
    if abs(margin) <= BOUNDARY_TOL:
        kind = Domination.BOUNDARY
    else:
        kind = Domination.RED if margin > 0 else Domination.GREEN
    return DominationReport(kind, margin, ext)


def domination(rho: float, tau_g, tau_r) -> Domination:
    """Red dominates when h(tau_g, tau_r) < (1 - rho) / rho, green when it is larger."""
    return domination_report(rho, tau_g, tau_r).kind


@dataclass(frozen=True)
class LambdaResult:
    value: float
    kappa_g: float
    kappa_r: float
    dual_residual: float   # h(1/2, kappa_r) - (1 - rho)/rho at the root


def lambda_threshold() -> LambdaResult:
    """Green share at which (kappa_g, 1/2) sits exactly on the domination boundary."""
    def gap(rho):
        return log_h(kappa_g(rho), 0.5)[0] - math.log((1.0 - rho) / rho)

    lam = bisect(gap, 0.25, 0.5, tol=ROOT_TOL)
    kr = kappa_r(lam)
    resid = math.exp(log_h(0.5, kr)[0]) - (1.0 - lam) / lam
    return LambdaResult(lam, kappa_g(lam), kr, resid)


def stochastic_potential(tau, w: int) -> int:
    """floor((1 - tau)(2w + 1)) + 1, computed exactly.

    The fewest random flips that let the opposite colour to tau's owner start an
    unstoppable run. The all-green state has potential stochastic_potential(tau_r, w),
    the all-red state stochastic_potential(tau_g, w).
    """
    tau = as_tolerance(tau)
    v = (1 - tau) * (2 * w + 1)
    return v.numerator // v.denominator + 1


def stochastically_stable(scenario: Scenario, w: int) -> str:
    """Which monochrome state has the smaller potential: "green", "red" or "both"."""
    pg = stochastic_potential(scenario.tau_r, w)
    pr = stochastic_potential(scenario.tau_g, w)
    return "green" if pg < pr else "red" if pr < pg else "both"


def theta_star(tau, w: int) -> Fraction:
    """Smallest multiple of 1/(2w+1) strictly above tau."""
    tau = Fraction(tau)
    W = 2 * w + 1
    return Fraction(math.floor(tau * W) + 1, W)


# -- classifier ---------------------------------------------------------------------

class Label(enum.Enum):
    STATIC_AE = "StaticAE"
    GREEN_TAKEOVER_AE = "GreenTakeoverAE"
    RED_TAKEOVER_AE = "RedTakeoverAE"
    GREEN_TOTAL = "GreenTotal"
    RED_TOTAL = "RedTotal"
    GREEN_AE = "GreenAE"
    RED_AE = "RedAE"
    OPEN_Q1 = "OpenQ1"
    OPEN_Q2 = "OpenQ2"
    THRESHOLD_CASE = "ThresholdCase"
    CONJECTURED_GREEN_TOTAL = "ConjecturedGreenTotal"
    CONJECTURED_RED_TOTAL = "ConjecturedRedTotal"
    CONJECTURED_COIN_FLIP = "ConjecturedCoinFlip"

    def swapped(self) -> "Label":
        return _SWAP.get(self, self)

    @property
    def decided(self) -> bool:
        """True for labels that make a definite prediction."""
        return self not in _UNDECIDED


_PAIRS = [(Label.GREEN_TAKEOVER_AE, Label.RED_TAKEOVER_AE), (Label.GREEN_TOTAL, Label.RED_TOTAL),
          (Label.GREEN_AE, Label.RED_AE),
          (Label.CONJECTURED_GREEN_TOTAL, Label.CONJECTURED_RED_TOTAL)]
_SWAP = {a: b for a, b in _PAIRS} | {b: a for a, b in _PAIRS}
_UNDECIDED = {Label.OPEN_Q1, Label.OPEN_Q2, Label.THRESHOLD_CASE, Label.CONJECTURED_GREEN_TOTAL,
              Label.CONJECTURED_RED_TOTAL, Label.CONJECTURED_COIN_FLIP}


@dataclass(frozen=True)
class Prediction:
    label: Label
    reason: str
    # for the open regions: the cubic Z at the limiting local density, if computed
    z_limit: float | None = None

    def swapped(self) -> "Prediction":
        return Prediction(self.label.swapped(), _swap_words(self.reason), self.z_limit)


def _swap_words(text: str) -> str:
    pairs = [("green", "red"), ("rho/2", "(1 - rho)/2"), ("1 - rho/2", "1 - (1 - rho)/2")]
    words = {a: b for a, b in pairs} | {b: a for a, b in pairs}
    # longest first so that "1 - (1 - rho)/2" is not read as "1 - " + "(1 - rho)/2"
    pattern = "|".join(re.escape(k) for k in sorted(words, key=len, reverse=True))
    return re.sub(pattern, lambda m: words[m.group(0)], text)


def _cmp(a: float, b: float) -> int:
    """-1, 0 or 1; 0 when a is within BAND of b."""
    if abs(a - b) <= BAND:
        return 0
    return -1 if a < b else 1


def _threshold(reason: str) -> Prediction:
    return Prediction(Label.THRESHOLD_CASE, reason)


def _both_low(rho: float, tg: float, tr: float) -> Prediction | None:
    """Rules for tau_g, tau_r < 1/2, in the orientation where only the green-side
    version of each rule is spelled out. Returns None when the dual case applies."""
    kg, kr = kappa_g(rho), kappa_r(rho)
    cg, cr = _cmp(tg, kg), _cmp(tr, kr)
    if cg == 0 or cr == 0:
        return _threshold("tolerance within band of a stability threshold")
    if cg < 0 and cr < 0:
        return Prediction(Label.STATIC_AE, "both colours below their stability thresholds")
    dom = domination(rho, tg, tr)
    if dom is Domination.BOUNDARY:
        return _threshold("on the domination boundary")
    if cr > 0 and dom is Domination.GREEN:
        return Prediction(Label.GREEN_TAKEOVER_AE,
                          "red intervals unstable and green dominates: green firewalls take over")
    if cg < 0 and cr > 0 and dom is Domination.RED:
        side = _cmp(tg, rho / 2)
        if side == 0:
            return _threshold("green tolerance within band of rho/2")
        if side > 0:
            return Prediction(Label.STATIC_AE,
                              "red dominates but cannot break stable green intervals")
        return Prediction(Label.OPEN_Q1, "red dominates with green tolerance at most rho/2",
                          eval_Z(1.0 - tg, 1.0 - rho))
    return None


def _both_high_selective(rho: float, tg: float, tr: float) -> Prediction | None:
    mg, mr = mu_g(rho), mu_r(rho)
    cg, cr = _cmp(tg, mg), _cmp(tr, mr)
    if cg == 0 or cr == 0:
        return _threshold("tolerance within band of a takeover threshold")
    if cg > 0 and cr > 0:
        return Prediction(Label.STATIC_AE, "both colours too intolerant to start firewalls")
    dom = domination(rho, tg, tr)
    if dom is Domination.BOUNDARY:
        return _threshold("on the domination boundary")
    if cg < 0 and dom is Domination.GREEN:
        return Prediction(Label.GREEN_AE, "green can spark firewalls and green dominates")
    if cg < 0 and cr > 0 and dom is Domination.RED:
        side = _cmp(tr, 1.0 - rho / 2)
        if side == 0:
            return _threshold("red tolerance within band of 1 - rho/2")
        if side < 0:
            return Prediction(Label.STATIC_AE,
                              "red dominates but cannot spark firewalls of its own")
        return Prediction(Label.OPEN_Q2, "red dominates with red tolerance at least 1 - rho/2",
                          eval_Z(tr, 1.0 - rho))
    return None


def _oriented(rule, rho: float, tg: float, tr: float) -> Prediction:
    """Apply a green-oriented rule, then its colour-swapped dual."""
    p = rule(rho, tg, tr)
    if p is not None:
        return p
    p = rule(1.0 - rho, tr, tg)
    if p is not None:
        return p.swapped()
    raise AssertionError(f"no rule covers rho={rho} tau_g={tg} tau_r={tr}")


def classify(scenario: Scenario, dynamic: Dynamic | str) -> Prediction:
    """Predicted outcome of the scenario for large neighbourhoods and rings."""
    if isinstance(dynamic, str):
        dynamic = Dynamic.parse(dynamic)
    if dynamic.kind == "perturbed":
        raise ValueError("no deterministic prediction for perturbed dynamics; "
                         "see stochastically_stable")
    rho, tg, tr = scenario.rho, float(scenario.tau_g), float(scenario.tau_r)
    hg, hr = _cmp(tg, 0.5), _cmp(tr, 0.5)
    if hg == 0 or hr == 0:
        return _threshold("tolerance within band of 1/2")
    if hg < 0 and hr < 0:
        return _oriented(_both_low, rho, tg, tr)
    if hg < 0 < hr:
        return Prediction(Label.GREEN_TOTAL, "tolerant green meets intolerant red")
    if hr < 0 < hg:
        return Prediction(Label.RED_TOTAL, "tolerant red meets intolerant green")
    if dynamic.kind == "selective":
        return _oriented(_both_high_selective, rho, tg, tr)
    if dynamic.kind == "synchronous":
        if _cmp(tg, 2 / 3) < 0 and _cmp(tg, tr) < 0:
            return Prediction(Label.GREEN_TOTAL,
                              "synchronous, green tolerance below 2/3 and below red's")
        if _cmp(tr, 2 / 3) < 0 and _cmp(tr, tg) < 0:
            return Prediction(Label.RED_TOTAL,
                              "synchronous, red tolerance below 2/3 and below green's")
    c = _cmp(tg, tr)
    if c < 0:
        return Prediction(Label.CONJECTURED_GREEN_TOTAL, "the more tolerant colour is expected to win")
    if c > 0:
        return Prediction(Label.CONJECTURED_RED_TOTAL, "the more tolerant colour is expected to win")
    return Prediction(Label.CONJECTURED_COIN_FLIP, "equal tolerances")
