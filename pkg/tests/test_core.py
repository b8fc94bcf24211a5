"""Closed-form thresholds, equilibria and condition checkers.

Frozen expected constants below were computed by an independent substitution
script over the displayed formulas before these tests were written.
"""

import dataclasses
import math

import pytest

from sirslab import (ModelParams, ParameterError, basic_reproduction_number,
                     check_disease_free_conditions, check_ergodic_conditions,
                     deterministic_drift, equilibria)

# frozen by independent substitution at the disease-free regime (beta=0.08)
K_CONST = 0.0002988505747126439
C1 = 0.9319371727748692
BOUND = 8.6708621434745
# frozen at the endemic regime (beta=0.2)
E_STAR = (0.45, 0.3101952277657268, 0.20878524945770074)
EXCESS = 0.022082429501084598
M_TILDE = 0.011022720199190787
K_TILDE = 0.984988231945993


def test_r0_reference_values(disease_free_params, endemic_params):
    assert basic_reproduction_number(disease_free_params) == pytest.approx(
        0.8889, abs=1e-4)
    assert basic_reproduction_number(endemic_params) == pytest.approx(
        2.222, abs=1e-3)


def test_r0_zero_beta(disease_free_params):
    p = dataclasses.replace(disease_free_params, beta=0.0)
    assert basic_reproduction_number(p) == 0.0


@pytest.mark.parametrize("field,value", [
    ("lam", 0.0), ("lam", -1.0), ("mu", 0.0), ("beta", -0.1),
    ("gamma", -1e-9), ("sigma", -0.05), ("tau", -1.0),
    ("mu", math.nan), ("lam", math.inf),
])
def test_parameter_validation(disease_free_params, field, value):
    with pytest.raises(ParameterError):
        dataclasses.replace(disease_free_params, **{field: value})


def test_disease_free_equilibrium(disease_free_params):
    eq = equilibria(disease_free_params)
    assert eq.e0 == (1.0, 0.0, 0.0)
    assert eq.e_star is None and eq.n_star is None and eq.excess is None


def test_e0_exact_for_random_parameters(rng):
    for _ in range(200):
        lam, mu = rng.uniform(0.01, 5.0, 2)
        beta, gamma, delta, eta, sigma, tau = rng.uniform(0.0, 2.0, 6)
        p = ModelParams(lam=lam, mu=mu, beta=beta, gamma=gamma, delta=delta,
                        eta=eta, sigma=sigma, tau=tau)
        eq = equilibria(p)
        assert eq.e0 == (lam / mu, 0.0, 0.0)
        assert (eq.e_star is not None) == (eq.r0 > 1.0)
        if eq.e_star is not None:
            assert all(v > 0 for v in eq.e_star)


def test_endemic_equilibrium_frozen_values(endemic_params):
    eq = equilibria(endemic_params)
    assert eq.e_star == pytest.approx(E_STAR, rel=1e-12)
    assert eq.e_star[0] == pytest.approx(
        (endemic_params.gamma + endemic_params.delta + endemic_params.mu)
        / endemic_params.beta, rel=1e-14)
    assert eq.n_star == pytest.approx(sum(E_STAR), rel=1e-12)
    assert eq.excess == pytest.approx(EXCESS, rel=1e-12)


def test_drift_vanishes_at_equilibria(endemic_params, rng):
    eq = equilibria(endemic_params)
    scale = max(abs(v) for v in dataclasses.astuple(endemic_params))
    drift = deterministic_drift(endemic_params, eq.e_star, eq.e_star[1])
    assert max(abs(d) for d in drift) < 1e-10 * scale
    drift0 = deterministic_drift(endemic_params, eq.e0, 0.0)
    assert max(abs(d) for d in drift0) < 1e-14
    # and for random supercritical parameter draws
    for _ in range(100):
        p = ModelParams(lam=rng.uniform(0.1, 2), mu=rng.uniform(0.01, 0.5),
                        beta=rng.uniform(0.5, 5), gamma=rng.uniform(0, 1),
                        delta=rng.uniform(0, 1), eta=rng.uniform(0, 1),
                        sigma=0.0, tau=1.0)
        eq = equilibria(p)
        if eq.e_star is None:
            continue
        scale = max(abs(v) for v in dataclasses.astuple(p))
        drift = deterministic_drift(p, eq.e_star, eq.e_star[1])
        assert max(abs(d) for d in drift) < 1e-10 * scale


def test_disease_free_conditions_reference(disease_free_params):
    df = check_disease_free_conditions(disease_free_params)
    assert df.r0_lt_one and df.mu_above_rates
    assert df.mu_above_ratio and df.damping_positive
    assert df.conditions_hold
    assert df.k_const == pytest.approx(K_CONST, rel=1e-12)
    assert df.c1 == pytest.approx(C1, rel=1e-12)
    assert df.bound == pytest.approx(BOUND, rel=1e-12)


def test_k_is_min_of_two_candidates(disease_free_params):
    p = disease_free_params
    df = check_disease_free_conditions(p)
    s2 = p.sigma ** 2
    cand_a = (2 * p.mu - p.eta - s2) / 4
    r0 = basic_reproduction_number(p)
    cand_b = (p.lam * (p.mu + p.eta) * (p.mu + p.gamma + p.delta) * (1 - r0)
              / (p.mu + p.gamma + p.eta))
    assert df.k_const <= cand_a + 1e-15 and df.k_const <= cand_b + 1e-15
    assert df.k_const in (cand_a, cand_b)


def test_large_sigma_breaks_damping(disease_free_params):
    p = dataclasses.replace(disease_free_params, sigma=0.25)
    df = check_disease_free_conditions(p)
    assert not df.damping_positive
    assert not df.conditions_hold
    assert df.bound is None


def test_endemic_regime_fails_disease_free_check(endemic_params):
    df = check_disease_free_conditions(endemic_params)
    assert not df.r0_lt_one
    assert not df.conditions_hold
    assert df.bound is None


def test_ergodic_conditions_reference(endemic_params):
    er = check_ergodic_conditions(endemic_params)
    assert er.r0_gt_one and er.excess_positive and er.sigma_small
    assert er.conditions_hold
    assert er.m_tilde == pytest.approx(M_TILDE, rel=1e-12)
    assert er.k_tilde == pytest.approx(K_TILDE, rel=1e-12)
    assert er.region_radius_sq == pytest.approx(
        endemic_params.sigma ** 2 * K_TILDE / M_TILDE, rel=1e-12)
    assert er.m_tilde > 0  # required whenever all three gates hold


def test_ergodic_sigma_zero_region(endemic_params):
    p = dataclasses.replace(endemic_params, sigma=0.0)
    er = check_ergodic_conditions(p)
    assert er.sigma_small
    assert er.region_radius_sq == 0.0


def test_ergodic_subcritical_unset(disease_free_params):
    er = check_ergodic_conditions(disease_free_params)
    assert not er.r0_gt_one
    assert er.m_tilde is None and er.k_tilde is None
    assert er.region_radius_sq is None
    assert not er.conditions_hold


def test_r0_monotone_sweeps(disease_free_params):
    p = disease_free_params

    def r0(**kw):
        return basic_reproduction_number(dataclasses.replace(p, **kw))

    grid = [0.02, 0.05, 0.1, 0.2, 0.5]
    for field, increasing in (("beta", True), ("lam", True), ("mu", False),
                              ("gamma", False), ("delta", False)):
        vals = [r0(**{field: g}) for g in grid]
        diffs = [b - a for a, b in zip(vals, vals[1:])]
        assert all((d > 0) == increasing for d in diffs), field
