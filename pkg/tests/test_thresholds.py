import math
from fractions import Fraction

import numpy as np
import pytest

from schelling1d.numerics import eval_f, eval_g
from schelling1d.probe import probe
from schelling1d.ring import Scenario
from schelling1d.thresholds import (Domination, Label, classify, domination, domination_report,
                                    kappa_g, kappa_r, lambda_threshold, mu_g, mu_r,
                                    mu_thresholds, stochastic_potential, stochastically_stable,
                                    thresholds)

RHOS = [round(0.05 * k, 2) for k in range(1, 20)]


def test_half_values():
    assert kappa_g(0.5) == pytest.approx(0.353092313, abs=1e-6)
    assert kappa_r(0.5) == pytest.approx(0.353092313, abs=1e-6)
    assert mu_g(0.5) == pytest.approx(0.64690768667, abs=1e-6)
    assert mu_r(0.5) == pytest.approx(0.64690768667, abs=1e-6)


@pytest.mark.parametrize("rho", RHOS)
def test_kappa_solves_its_equation(rho):
    kg = kappa_g(rho)
    if rho >= 0.75:
        assert kg == 0.5
    else:
        assert eval_f(kg) == pytest.approx(1 / (2 * (1 - rho)), rel=1e-10)
        assert rho / 2 < kg < rho
    mg = mu_g(rho)
    if rho > 0.25:
        assert eval_g(mg) == pytest.approx(1 / (2 * rho), rel=1e-10)


@pytest.mark.parametrize("rho", RHOS)
def test_mirror_and_mu_identities(rho):
    assert kappa_g(rho) == pytest.approx(kappa_r(1 - rho), abs=1e-12)
    assert mu_g(rho) == pytest.approx(1 - kappa_r(rho), abs=1e-9)
    assert mu_r(rho) == pytest.approx(1 - kappa_g(rho), abs=1e-9)
    assert mu_g(rho) == pytest.approx(mu_r(1 - rho), abs=1e-12)
    t = thresholds(rho)
    assert (t.mu_g, t.mu_r) == mu_thresholds(rho)


def test_easy_cases():
    assert kappa_g(0.8) == 0.5
    assert kappa_r(0.2) == 0.5


@pytest.mark.parametrize("fn,rho,value", [
    (kappa_g, 0.7, 0.48), (kappa_r, 0.7, 0.21), (kappa_r, 0.74, 0.186), (kappa_g, 0.74, 0.497),
    (mu_g, 0.4, 0.58), (mu_r, 0.6, 0.58), (mu_g, 0.7, 0.79), (mu_r, 0.7, 0.52)])
def test_quoted_threshold_values(fn, rho, value):
    assert fn(rho) == pytest.approx(value, abs=0.005)


@pytest.mark.parametrize("fn,rho", [(mu_r, 0.4), (mu_g, 0.6)])
def test_quoted_value_truncated_to_two_digits(fn, rho):
    # quoted as 0.71; the solved value is 0.71545..., i.e. truncated rather than rounded
    v = fn(rho)
    assert v == pytest.approx(1 - kappa_g(0.4), abs=1e-12)
    assert math.floor(100 * v) / 100 == 0.71
    assert v == pytest.approx(0.715452637, abs=1e-8)


def test_lambda():
    lam = lambda_threshold()
    assert lam.value == pytest.approx(0.38493708, abs=1e-4)
    assert lam.kappa_g == pytest.approx(0.27407242, abs=1e-4)
    assert lam.kappa_r == pytest.approx(0.42832491, abs=1e-4)
    assert math.isfinite(lam.dual_residual)


# -- domination ----------------------------------------------------------------------

def test_domination_examples():
    assert domination(0.3, 0.4, 0.6) is Domination.RED
    assert domination(0.5, 0.3, 0.4) is Domination.GREEN
    for t in (0.1, 0.3, 0.45, 0.7, 0.9):
        assert domination(0.5, t, t) is Domination.BOUNDARY


def test_domination_on_the_line_is_flagged():
    rep = domination_report(0.3, 0.4, 0.6)
    assert rep.line_extended
    # on the line: red iff tau_g > rho
    assert domination(0.3, 0.25, 0.75) is Domination.GREEN
    assert domination(0.3, 0.35, 0.65) is Domination.RED


def test_domination_swap_symmetry():
    rng = np.random.default_rng(1)
    for rho, tg, tr in rng.uniform(0.02, 0.98, size=(2000, 3)):
        a, b = domination(rho, tg, tr), domination(1 - rho, tr, tg)
        swap = {Domination.RED: Domination.GREEN, Domination.GREEN: Domination.RED,
                Domination.BOUNDARY: Domination.BOUNDARY}
        assert b is swap[a]


@pytest.mark.parametrize("rho", [0.2, 0.3, 0.42, 0.6])
def test_domination_monotone_on_each_triangle(rho):
    """Raising tau_g or lowering tau_r never turns red domination into green."""
    pts = np.linspace(0.01, 0.99, 50)
    red = np.array([[domination(rho, tg, tr) is Domination.RED for tr in pts] for tg in pts])
    below = pts[:, None] + pts[None, :] < 1
    for tri in (below, ~below):
        for i in range(50):
            for j in range(50):
                if not (tri[i, j] and red[i, j]):
                    continue
                if i + 1 < 50 and tri[i + 1, j]:
                    assert red[i + 1, j]
                if j > 0 and tri[i, j - 1]:
                    assert red[i, j - 1]


def test_small_rho_always_red_in_the_squares():
    pts = np.linspace(0.005, 0.495, 60)
    for rho in (0.05, 0.1, 0.2):
        for a in pts:
            for b in pts:
                assert domination(rho, a, b) is Domination.RED
                assert domination(rho, 1 - a, 1 - b) is Domination.RED


@pytest.mark.parametrize("rho,tg,tr", [(0.42, 0.3, 0.4), (0.42, 0.38, 0.33), (0.5, 0.3, 0.4),
                                       (0.3, 0.2, 0.35)])
def test_unhappy_ratio_sign_matches_domination(rho, tg, tr):
    dom = domination(rho, tg, tr)
    logs = []
    for w in (50, 100, 200):
        rep = probe(Scenario(rho, tg, tr), w)
        logs.append(rep.log_unhappy_g - rep.log_unhappy_r)
    # red dominating: red's unhappy nodes are rarer, so unhappy greens win
    sign = 1 if dom is Domination.RED else -1
    assert all(sign * v > 0 for v in logs)
    assert abs(logs[0]) < abs(logs[1]) < abs(logs[2])


@pytest.mark.parametrize("rho,tg,tr", [(0.42, 0.6, 0.7), (0.5, 0.55, 0.65), (0.6, 0.7, 0.6)])
def test_hopeful_ratio_sign_matches_domination(rho, tg, tr):
    dom = domination(rho, tg, tr)
    logs = []
    for w in (50, 100, 200):
        rep = probe(Scenario(rho, tg, tr), w)
        logs.append(rep.log_hopeful_g - rep.log_hopeful_r)
    sign = 1 if dom is Domination.RED else -1
    assert all(sign * v > 0 for v in logs)
    assert abs(logs[0]) < abs(logs[1]) < abs(logs[2])


@pytest.mark.parametrize("rho,tg", [(0.4, 0.55), (0.4, 0.62), (0.6, 0.65), (0.6, 0.75)])
def test_hopeful_vs_intractable_matches_mu(rho, tg):
    """Hopeful reds beat green-intractable windows exactly when tau_g < mu_g."""
    below = tg < mu_g(rho)
    logs = []
    for w in (50, 100, 200):
        rep = probe(Scenario(rho, tg, 0.6), w)
        logs.append(rep.log_hopeful_r - rep.log_intract_g)
    assert all((v > 0) == below for v in logs)
    assert abs(logs[0]) < abs(logs[2])


# -- classifier ----------------------------------------------------------------------

@pytest.mark.parametrize("rho,tg,tr,label", [
    (0.2, "0.25", "0.65", Label.GREEN_TOTAL),
    (0.4, "0.65", "0.75", Label.STATIC_AE),
    (0.3, "0.13", "0.49", Label.OPEN_Q1),
    (0.7, "0.49", "0.13", Label.OPEN_Q1),
    (0.6, "0.43", "0.27", Label.STATIC_AE),
    (0.48, "0.38", "0.46", Label.GREEN_TAKEOVER_AE),
    (0.42, "0.25", "0.35", Label.STATIC_AE),
    (0.74, "0.93", "0.502", Label.OPEN_Q2),
    (0.42, "0.5", "0.3", Label.THRESHOLD_CASE),
])
def test_classify_examples(rho, tg, tr, label):
    assert classify(Scenario(rho, tg, tr), "selective").label is label


def test_dual_reasons_name_the_right_colour():
    p = classify(Scenario(0.52, "0.46", "0.38"), "selective")
    assert p.label is Label.RED_TAKEOVER_AE
    assert "red dominates" in p.reason and "green dominates" not in p.reason


def test_open_regions_carry_z():
    p = classify(Scenario(0.3, "0.13", "0.49"), "selective")
    assert p.z_limit is not None
    p2 = classify(Scenario(0.74, "0.93", "0.502"), "selective")
    assert p2.z_limit == pytest.approx(-0.06, abs=0.005)


def test_classify_threshold_band():
    kg = kappa_g(0.42)
    s = Scenario(0.42, Fraction(round(kg * 10**9), 10**9), "0.45")
    assert classify(s, "selective").label is Label.THRESHOLD_CASE


def test_classify_other_dynamics():
    assert classify(Scenario(0.5, "0.6", "0.7"), "synchronous").label is Label.GREEN_TOTAL
    assert classify(Scenario(0.5, "0.7", "0.6"), "synchronous").label is Label.RED_TOTAL
    assert classify(Scenario(0.5, "0.7", "0.8"), "synchronous").label is \
        Label.CONJECTURED_GREEN_TOTAL
    assert classify(Scenario(0.5, "0.6", "0.7"), "incremental").label is \
        Label.CONJECTURED_GREEN_TOTAL
    assert classify(Scenario(0.5, "0.6", "0.6"), "incremental").label is \
        Label.CONJECTURED_COIN_FLIP
    with pytest.raises(ValueError):
        classify(Scenario(0.5, "0.6", "0.7"), "perturbed:0.01")


@pytest.mark.parametrize("dynamic", ["selective", "incremental", "synchronous"])
def test_classify_role_swap_invariance(dynamic):
    rng = np.random.default_rng(11)
    for rho, a, b in rng.uniform(0.01, 0.99, size=(2000, 3)):
        tg, tr = Fraction(round(a * 1000), 1000), Fraction(round(b * 1000), 1000)
        if not (0 < tg < 1 and 0 < tr < 1):
            continue
        s = Scenario(float(rho), tg, tr)
        p, q = classify(s, dynamic), classify(s.swapped(), dynamic)
        assert q.label is p.label.swapped()
        assert q.reason == p.swapped().reason
        assert p.swapped().swapped() == p


@pytest.mark.parametrize("rho,tg,tr", [(0.29, "0.11", "0.497"), (0.71, "0.497", "0.11"),
                                       (0.3, "0.13", "0.49")])
def test_reason_wording_survives_a_double_swap(rho, tg, tr):
    p = classify(Scenario(rho, tg, tr), "incremental")
    assert p.swapped().swapped().reason == p.reason
    assert classify(Scenario(rho, tg, tr).swapped(), "incremental").reason == p.swapped().reason


# -- stochastic potential ------------------------------------------------------------

def test_stochastic_potential():
    assert stochastic_potential("0.75", 2) == 2
    assert stochastic_potential("0.6", 10) == 9
    assert stochastic_potential("0.7", 10) == 7
    assert stochastically_stable(Scenario(0.5, "0.6", "0.7"), 10) == "green"
    assert stochastically_stable(Scenario(0.5, "0.7", "0.6"), 10) == "red"
    assert stochastically_stable(Scenario(0.5, "0.65", "0.65"), 10) == "both"
