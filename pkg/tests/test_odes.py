"""Growth/decay structure of the second-order ODE class."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahmass.odes import (ODEProblem, build_decaying_solution, fundamental_pair,
                         particular_solution, solve_second_order,
                         two_point_solution)


def random_problem(rng, horizon=15.0, with_forcing=False):
    """A problem inside the hypothesis class: decaying bounded coefficients."""
    a_p = rng.uniform(-0.5, 0.5)
    a_q = rng.uniform(-0.8, 0.8)
    a_f = rng.uniform(-1.0, 1.0) if with_forcing else 0.0
    d = rng.uniform(0.4, 2.5)
    w_p, w_q = rng.uniform(0.5, 3.0, size=2)
    c0 = max(abs(a_p), abs(a_q), abs(a_f)) + 1e-9
    return ODEProblem(
        p=lambda t: a_p * np.exp(-d * t) * np.cos(w_p * t),
        q=lambda t: a_q * np.exp(-d * t) * np.sin(w_q * t + 0.3),
        f=(lambda t: a_f * np.exp(-d * t)) if with_forcing else None,
        horizon=horizon, bounds=(c0, d))


def test_exponential_solutions():
    prob = ODEProblem(horizon=20.0)
    t = np.linspace(0.0, 20.0, 80)
    grow = solve_second_order(prob, 1.0, 1.0)
    assert np.abs(grow.value(t) - np.exp(t)).max() / np.exp(20.0) < 1e-9
    assert np.abs((grow.value(t) - np.exp(t)) / np.exp(t)).max() < 1e-9
    decay = solve_second_order(prob, 1.0, -1.0)
    assert np.abs(decay.value(t) - np.exp(-t)).max() < 1e-9


def test_validation_rejects_bad_hypotheses():
    bad = ODEProblem(q=lambda t: -1.5 * np.exp(-0.0 * t), horizon=5.0)
    with pytest.raises(ValueError):
        bad.validate()
    lied = ODEProblem(p=lambda t: np.exp(-0.1 * t), horizon=5.0,
                      bounds=(0.5, 1.0))
    with pytest.raises(ValueError):
        lied.validate()


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.7, 0.7), st.floats(0.5, 2.0),
       st.floats(0.0, 1.5), st.floats(-0.8, 0.8))
def test_comparison_property_hypothesis(a_p, a_q, d, u0, du0):
    prob = ODEProblem(p=lambda t: a_p * np.exp(-d * t),
                      q=lambda t: a_q * np.exp(-d * t),
                      horizon=8.0, bounds=(max(abs(a_p), abs(a_q)) + 1e-9, d))
    hi = solve_second_order(prob, u0 + 0.1, du0 + 0.1, homogeneous=True, T=8.0)
    lo = solve_second_order(prob, u0, du0, homogeneous=True, T=8.0)
    t = np.linspace(0.05, 8.0, 60)
    assert np.all(hi.value(t) > lo.value(t))
    assert np.all(hi.d1(t) > lo.d1(t))


def test_comparison_property(rng):
    # u(0) >= v(0), u'(0) >= v'(0), not identical  =>  u > v and u' > v'
    for _ in range(20):
        prob = random_problem(rng, horizon=10.0)
        u0, du0 = rng.uniform(0.2, 2.0), rng.uniform(-0.5, 1.0)
        u = solve_second_order(prob, u0, du0, homogeneous=True, T=10.0)
        v = solve_second_order(prob, u0 - rng.uniform(0.01, 0.2),
                               du0 - rng.uniform(0.01, 0.2),
                               homogeneous=True, T=10.0)
        t = np.linspace(0.05, 10.0, 120)
        assert np.all(u.value(t) > v.value(t))
        assert np.all(u.d1(t) > v.d1(t))


def test_at_most_one_zero(rng):
    for _ in range(30):
        prob = random_problem(rng, horizon=12.0)
        u = solve_second_order(prob, rng.uniform(-1, 1), rng.uniform(-1, 1),
                               homogeneous=True, T=12.0)
        vals = u.value(np.linspace(0.0, 12.0, 2000))
        if np.abs(vals).max() == 0.0:
            continue
        signs = np.sign(vals[np.abs(vals) > 1e-13])
        flips = np.count_nonzero(np.diff(signs) != 0)
        assert flips <= 1


def test_decaying_solution_trivial():
    dec = build_decaying_solution(ODEProblem(horizon=25.0))
    t = np.linspace(0, 25, 200)
    assert np.abs(dec.solution.value(t) - np.exp(-t)).max() < 1e-8
    assert dec.positive and dec.decreasing


def test_decaying_solution_perturbed(rng):
    prob = ODEProblem(q=lambda t: np.exp(-2.0 * t), horizon=20.0,
                      bounds=(1.0, 2.0))
    dec = build_decaying_solution(prob)
    t = np.linspace(0, 20, 400)
    vals = dec.solution.value(t)
    assert dec.positive and dec.decreasing
    # bounded by C e^{-t} with a finite certificate
    C = np.max(np.maximum(vals * np.exp(t), np.exp(-t) / vals))
    assert np.isfinite(C) and C < 10.0
    # cross-check against an integration at tighter tolerance
    dec2 = build_decaying_solution(prob, rtol=1e-13)
    assert np.abs(dec2.solution.value(t) - vals).max() < 1e-8


def test_exhaustion_monotone():
    # two-point solutions increase with the endpoint on shared domains
    prob = ODEProblem(q=lambda t: 0.5 * np.exp(-t), horizon=10.0,
                      bounds=(0.5, 1.0))
    sols = [two_point_solution(prob, j) for j in (1, 2, 3, 4, 5, 6)]
    for j, (a, b) in enumerate(zip(sols[:-1], sols[1:]), start=1):
        t = np.linspace(0.05, j - 1e-6, 50)
        assert np.all(a.value(t) < b.value(t))


def test_fundamental_pair_trivial():
    pair = fundamental_pair(ODEProblem(horizon=25.0))
    assert abs(pair.C_certificate - 1.0) < 1e-5
    assert pair.wronskian_bound_ok()
    assert np.abs(pair.wronskian + 2.0).max() < 1e-6


def test_fundamental_pair_perturbed_horizon_stable():
    def make(T):
        return ODEProblem(p=lambda t: 0.3 * np.exp(-t),
                          q=lambda t: 0.5 * np.exp(-2 * t),
                          horizon=T, bounds=(0.5, 1.0))

    certs = {T: fundamental_pair(make(T)).C_certificate for T in (10, 15, 20, 25)}
    assert all(np.isfinite(c) for c in certs.values())
    base = certs[10]
    for T in (15, 20, 25):
        assert 0.5 <= certs[T] / base <= 2.0


def test_wronskian_bound_randomized(rng):
    for _ in range(5):
        pair = fundamental_pair(random_problem(rng, horizon=15.0), T=15.0)
        assert pair.wronskian_bound_ok()
        assert np.all(pair.wronskian < 0)


def test_particular_zero_forcing():
    prob = ODEProblem(horizon=20.0, bounds=(1e-9, 1.0))
    rep = particular_solution(prob)
    assert rep.c1 == 0.0 and rep.c2 == 0.0
    assert np.abs(rep.remainder).max() == 0.0


def test_particular_oracle_d2():
    # closed form: remainder e^(-2t)/3 with c1 = 1/6, c2 = -1/2
    prob = ODEProblem(f=lambda t: np.exp(-2.0 * t), horizon=25.0,
                      bounds=(1.0, 2.0))
    rep = particular_solution(prob)
    assert abs(rep.c1 - 1.0 / 6.0) < 1e-9
    assert abs(rep.c2 + 0.5) < 1e-9
    assert abs(rep.fitted_decay - 2.0) < 0.2
    m = rep.grid < 18.0
    gap = np.abs(rep.remainder - np.exp(-2 * rep.grid) / 3.0)[m]
    assert (gap * np.exp(2 * rep.grid[m])).max() < 1e-2


def test_particular_resonant_profile():
    prob = ODEProblem(f=lambda t: np.exp(-t), horizon=25.0, bounds=(1.0, 1.0))
    rep = particular_solution(prob)
    assert rep.profile_residual < 0.05
    assert abs(rep.c1 - 0.25) < 1e-9


def test_particular_slow_decay():
    prob = ODEProblem(f=lambda t: np.exp(-0.5 * t), horizon=25.0,
                      bounds=(1.0, 0.5))
    rep = particular_solution(prob)
    assert abs(rep.fitted_decay - 0.5) / 0.5 < 0.1
