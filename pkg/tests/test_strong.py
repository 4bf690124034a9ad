import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from muattack.core import AttackScenario, SystemParams
from muattack.strong import (cloning_range, expected_rate, rate_multi, rate_single,
                             solve_attack_probabilities, strong_attack_outcome)


def test_rate_oracles(link):
    # mpmath, 40 digits
    assert rate_single(link, 2.0, 1.0) == pytest.approx(0.010993153546211, rel=1e-12)
    assert rate_multi(link, 2.0, 1.0) == pytest.approx(0.009265129196653, rel=1e-12)
    assert expected_rate(link) == pytest.approx(0.006236377345287, rel=1e-12)


def test_duty_scales_rates(link):
    assert rate_single(link, 3.0, 0.4, duty=0.25) == pytest.approx(0.25 * rate_single(link, 3.0, 0.4))
    assert rate_multi(link, 3.0, 0.4, duty=0.25) == pytest.approx(0.25 * rate_multi(link, 3.0, 0.4))


def test_rate_multi_monte_carlo(link):
    rng = np.random.default_rng(20240611)
    samples = 10 ** 7
    x = 3.0
    n = rng.poisson(x * link.mu, samples)
    forwarded = np.maximum(n - 1, 0)
    clicked = rng.binomial(forwarded, link.bob_efficiency) > 0
    p_hat = clicked[n >= 2].sum() / samples
    sigma = math.sqrt(p_hat * (1 - p_hat) / samples)
    assert abs(2.0 * rate_multi(link, x, 1.0) - p_hat) < 3 * sigma


def test_partial_sequence_defaults_to_attacked(link):
    assert rate_multi(link, 2.0, [1.0]) == pytest.approx(rate_multi(link, 2.0, 1.0))
    assert rate_multi(link, 2.0, [0.0]) < rate_multi(link, 2.0, 1.0)


def test_p1_matches_bisection(link):
    x = 1.3
    target = expected_rate(link) - link.p_d
    p1 = brentq(lambda p: rate_single(link, x, p) + rate_multi(link, x, 1.0) - target, 0.0, 1.0,
                xtol=1e-15)
    probs = solve_attack_probabilities(link, x)
    assert probs.feasible
    assert probs.p1 == pytest.approx(p1, abs=1e-12)
    assert all(p == 1.0 for p in probs.p_multi)


def test_greedy_blocks_lowest_photon_numbers(link):
    probs = solve_attack_probabilities(link, 5.0)
    assert probs.p1 == 0.0
    first_nonzero = next(i for i, p in enumerate(probs.p_multi) if p > 0)
    assert all(p == 0.0 for p in probs.p_multi[:first_nonzero])
    assert all(p == 1.0 for p in probs.p_multi[first_nonzero + 1:])


def test_infeasible_when_blocking_at_low_x(link):
    probs = solve_attack_probabilities(link, 1.0, duty=1 / 3)
    assert not probs.feasible
    out = strong_attack_outcome(link, AttackScenario("bandwidth", 1.0, 2))
    assert not out.feasible and out.leaked_fraction is None


def test_explicit_p1_inside_range(link):
    lo, hi = cloning_range(link, 3.0)
    mid = 0.5 * (lo + hi)
    probs = solve_attack_probabilities(link, 3.0, p1=mid)
    r = rate_single(link, 3.0, probs.p1) + rate_multi(link, 3.0, probs.p_multi)
    assert r + link.p_d == pytest.approx(expected_rate(link), abs=1e-14)
    with pytest.raises(ValueError):
        solve_attack_probabilities(link, 3.0, p1=min(hi + 0.1, 1.5))


@settings(max_examples=300, deadline=None)
@given(x=st.floats(1.0, 40.0), loss=st.floats(0.0, 10.0), n_blocked=st.integers(0, 6),
       eta=st.floats(0.02, 0.9))
def test_rate_matching_residual(x, loss, n_blocked, eta):
    t = 10 ** (-loss / 10)
    params = SystemParams(mu=0.5 * t + 0.01, t=t, t_b=0.6, eta=eta, p_d=1e-5, f_ec=1.16,
                          visibility=0.97, qber=0.013)
    duty = 1 / (n_blocked + 1)
    probs = solve_attack_probabilities(params, x, duty)
    if probs.feasible:
        got = rate_single(params, x, probs.p1, duty) + rate_multi(params, x, probs.p_multi, duty)
        assert abs(got + params.p_d - expected_rate(params)) <= 1e-12


def test_no_leak_at_x_one(link):
    out = strong_attack_outcome(link, AttackScenario("edge_trigger", 1.0))
    assert out.feasible
    assert out.leaked_fraction == 0.0
    assert out.leak_raw < 0.0


def test_outcome_respects_qber_cap(link):
    for x in np.linspace(1.0, 3.0, 21):
        out = strong_attack_outcome(link, AttackScenario("edge_trigger", float(x), qber_cap=0.05))
        assert out.qber_observed <= 0.05 + 1e-12
        assert 0.0 <= out.d1_used <= 0.5
        assert out.rate_residual <= 1e-12


def test_full_leak_at_high_x(link):
    out = strong_attack_outcome(link, AttackScenario("edge_trigger", 10.0))
    assert out.leaked_fraction == 1.0


def test_leak_nondecreasing(link):
    values = [strong_attack_outcome(link, AttackScenario("saturation", float(x), 4)).leaked_fraction
              for x in np.linspace(1.0, 6.0, 101)]
    feasible = [v for v in values if v is not None]
    assert all(b >= a - 1e-12 for a, b in zip(feasible, feasible[1:]))
    assert values.index(feasible[0]) + len(feasible) == len(values)


def test_no_key_without_eve(link):
    noisy = link.with_qber(0.2)
    out = strong_attack_outcome(noisy, AttackScenario("edge_trigger", 2.0, qber_cap=0.3))
    assert not out.feasible and out.reason == "no key without Eve"


def test_single_rate_with_ideal_receiver():
    ideal = SystemParams(mu=0.457, t=0.457, t_b=1.0, eta=1.0, p_d=0.0, f_ec=1.16,
                         visibility=0.973, qber=0.0134)
    assert rate_single(ideal, 1.0, 1.0) == pytest.approx(0.1446817077, abs=1e-10)
    assert rate_multi(ideal, 2.0, 1.0) == pytest.approx(
        0.5 * (1 - math.exp(-0.914) * (1 + 0.914)), rel=1e-12)


def test_greedy_invariant_of_solver(link):
    for x in np.linspace(1.0, 30.0, 59):
        for duty in (1.0, 1 / 3, 1 / 5):
            probs = solve_attack_probabilities(link, float(x), duty)
            if not probs.feasible:
                continue
            partial = [i for i, p in enumerate(probs.p_multi) if p < 1.0]
            if partial:
                assert probs.p1 == 0.0
                assert all(p == 1.0 for p in probs.p_multi[max(partial) + 1:])


def test_free_cloning_dominates_greedy(link):
    for x in np.linspace(1.0, 4.0, 31):
        sc = AttackScenario("saturation", float(x), 4)
        free = strong_attack_outcome(link, sc)
        greedy = strong_attack_outcome(link, sc, free_cloning=False)
        assert free.feasible == greedy.feasible
        if free.feasible:
            assert free.leaked_fraction >= greedy.leaked_fraction
            assert free.leak_raw >= greedy.leak_raw - 1e-9 * max(1.0, abs(greedy.leak_raw))
            assert greedy.probabilities == solve_attack_probabilities(link, float(x), 0.2)


def test_larger_qber_cap_never_hurts(link):
    for x in (1.2, 1.4, 1.6, 2.0):
        tight = strong_attack_outcome(link, AttackScenario("edge_trigger", x, qber_cap=0.03))
        loose = strong_attack_outcome(link, AttackScenario("edge_trigger", x, qber_cap=0.08))
        assert loose.leaked_fraction >= tight.leaked_fraction
        assert loose.leak_raw >= tight.leak_raw - 1e-9 * max(1.0, abs(tight.leak_raw))
