"""Threshold quantities, equilibria and condition checkers for the delayed
SIRS model with multiplicative environmental noise.

Everything in this module is closed-form arithmetic on the model parameters.
Condition checks use the exact floating-point values with no tolerance slack;
boundary (equality) cases count as failures because the underlying statements
are strict inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

State = Tuple[float, float, float]


class ParameterError(ValueError):
    """A model parameter violates its sign constraint."""


@dataclass(frozen=True)
class ModelParams:
    """Rate constants of the SIRS model plus noise intensity and delay horizon.

    All rates are in 1/time units, ``sigma`` is in 1/sqrt(time) and ``tau``
    is a time.  ``lam`` is the recruitment rate (written out because
    ``lambda`` is reserved in Python).
    """

    lam: float    # recruitment rate
    mu: float     # natural death rate
    beta: float   # transmission coefficient
    gamma: float  # recovery rate
    delta: float  # disease-induced death rate
    eta: float    # immunity-loss rate
    sigma: float  # noise intensity
    tau: float    # delay horizon

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ParameterError("lam must be finite and > 0")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ParameterError("mu must be finite and > 0")
        for name in ("beta", "gamma", "delta", "eta", "sigma", "tau"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be finite and >= 0")


@dataclass(frozen=True)
class EquilibriaReport:
    """Disease-free and (when it exists) endemic equilibrium of the
    deterministic system, together with the threshold number."""

    r0: float
    e0: State
    e_star: Optional[State]
    n_star: Optional[float]
    excess: Optional[float]  # mu*S* - eta*R*, present iff e_star is


@dataclass(frozen=True)
class DiseaseFreeBoundReport:
    """Verdicts for the disease-free asymptotic bound and its constants.

    ``bound`` is the right-hand side of the long-run mean-oscillation
    estimate around the disease-free equilibrium; it is populated only when
    every condition holds.
    """

    r0_lt_one: bool
    mu_above_rates: bool      # mu > gamma + delta + 3/2*(eta + sigma^2)
    mu_above_ratio: bool      # mu > the rational expression in the max
    damping_positive: bool    # gamma + delta - eta - sigma^2 > 0
    k_const: Optional[float]
    c1: Optional[float]
    bound: Optional[float]

    @property
    def conditions_hold(self) -> bool:
        return (self.r0_lt_one and self.mu_above_rates
                and self.mu_above_ratio and self.damping_positive)


@dataclass(frozen=True)
class ErgodicConditionReport:
    """Verdicts and constants for uniqueness/ergodicity of the invariant
    measure in the endemic regime."""

    r0_gt_one: bool
    excess_positive: bool
    sigma_small: bool         # sigma^2 <= mu/2
    m_tilde: Optional[float]
    k_tilde: Optional[float]
    region_radius_sq: Optional[float]  # sigma^2 * k_tilde / m_tilde

    @property
    def conditions_hold(self) -> bool:
        return self.r0_gt_one and self.excess_positive and self.sigma_small


def basic_reproduction_number(p: ModelParams) -> float:
    """beta*lam / (mu*(mu + gamma + delta))."""
    return p.beta * p.lam / (p.mu * (p.mu + p.gamma + p.delta))


def equilibria(p: ModelParams) -> EquilibriaReport:
    """Compute E0 = (lam/mu, 0, 0) and, iff R0 > 1, the interior equilibrium.

    The endemic components come from the closed-form fixed point of the
    deterministic vector field:

        S* = (gamma + delta + mu) / beta
        I* = (eta + mu) * (beta*lam - mu*(gamma + delta + mu)) / D
        R* = gamma * (beta*lam - mu*(gamma + delta + mu)) / D

    with D = beta * (gamma*mu + (delta + mu)*(eta + mu)).
    """
    r0 = basic_reproduction_number(p)
    e0: State = (p.lam / p.mu, 0.0, 0.0)
    if r0 <= 1.0:
        return EquilibriaReport(r0=r0, e0=e0, e_star=None, n_star=None, excess=None)
    surplus = p.beta * p.lam - p.mu * (p.gamma + p.delta + p.mu)
    denom = p.beta * (p.gamma * p.mu + (p.delta + p.mu) * (p.eta + p.mu))
    s_star = (p.gamma + p.delta + p.mu) / p.beta
    i_star = (p.eta + p.mu) * surplus / denom
    r_star = p.gamma * surplus / denom
    e_star: State = (s_star, i_star, r_star)
    return EquilibriaReport(
        r0=r0,
        e0=e0,
        e_star=e_star,
        n_star=s_star + i_star + r_star,
        excess=p.mu * s_star - p.eta * r_star,
    )


def deterministic_drift(p: ModelParams, state: State, incidence_value: float) -> State:
    """Drift vector of the model at ``state`` given the incidence value H.

    With sigma = 0 and a constant history this is the full right-hand side,
    which must vanish at an equilibrium.
    """
    s, i, r = state
    ds = p.lam - p.mu * s - p.beta * s * incidence_value + p.eta * r
    di = p.beta * s * incidence_value - (p.mu + p.gamma + p.delta) * i
    dr = p.gamma * i - (p.mu + p.eta) * r
    return (ds, di, dr)


def check_disease_free_conditions(p: ModelParams) -> DiseaseFreeBoundReport:
    """Evaluate the sufficient conditions for the disease-free bound.

    Conditions (all strict):
      * R0 < 1
      * mu > gamma + delta + 3/2*(eta + sigma^2)
      * mu > (gamma^2 + gamma*delta - (2*eta - sigma^2)*(delta - eta - sigma^2))
             / (2*(gamma + delta - eta - sigma^2))
      * gamma + delta - eta - sigma^2 > 0

    Constants:
      K  = min{ (2*mu - eta - sigma^2)/4,
                lam*(mu + eta)*(mu + gamma + delta)*(1 - R0)/(mu + gamma + eta) }
      c1 = 2*(gamma + delta + eta + sigma^2) / (2*mu - eta - sigma^2)

    and the bound is lam^2*sigma^2/(2*K*mu^2) * (c1 + 1)/c1, populated only
    when every condition holds.
    """
    r0 = basic_reproduction_number(p)
    s2 = p.sigma ** 2
    damping = p.gamma + p.delta - p.eta - s2

    r0_lt_one = r0 < 1.0
    mu_above_rates = p.mu > p.gamma + p.delta + 1.5 * (p.eta + s2)
    damping_positive = damping > 0.0
    if damping_positive:
        ratio = (p.gamma ** 2 + p.gamma * p.delta
                 - (2.0 * p.eta - s2) * (p.delta - p.eta - s2)) / (2.0 * damping)
        mu_above_ratio = p.mu > ratio
    else:
        mu_above_ratio = False

    k_const = c1 = bound = None
    two_mu = 2.0 * p.mu - p.eta - s2
    if two_mu > 0.0:
        k_const = min(
            two_mu / 4.0,
            p.lam * (p.mu + p.eta) * (p.mu + p.gamma + p.delta) * (1.0 - r0)
            / (p.mu + p.gamma + p.eta),
        )
        c1 = 2.0 * (p.gamma + p.delta + p.eta + s2) / two_mu
    report = DiseaseFreeBoundReport(
        r0_lt_one=r0_lt_one,
        mu_above_rates=mu_above_rates,
        mu_above_ratio=mu_above_ratio,
        damping_positive=damping_positive,
        k_const=k_const,
        c1=c1,
        bound=None,
    )
    if report.conditions_hold and k_const is not None and k_const > 0 and c1 > 0:
        bound = (p.lam ** 2 * s2) / (2.0 * k_const * p.mu ** 2) * (c1 + 1.0) / c1
        report = DiseaseFreeBoundReport(
            r0_lt_one=r0_lt_one,
            mu_above_rates=mu_above_rates,
            mu_above_ratio=mu_above_ratio,
            damping_positive=damping_positive,
            k_const=k_const,
            c1=c1,
            bound=bound,
        )
    return report


def check_ergodic_conditions(p: ModelParams) -> ErgodicConditionReport:
    """Evaluate the gates for uniqueness/ergodicity of the invariant measure.

    Gates: R0 > 1, mu*S* - eta*R* > 0, and sigma^2 <= mu/2.  When the
    interior equilibrium exists (and gamma, delta > 0 so every term is
    defined) the constants are

      m~ = min{ mu - eta*R*/S*,
                eta/(gamma*S*) * (gamma + mu + eta - sigma^2
                                  + delta*(mu + eta - 2*sigma^2)/(2*mu + eta)),
                (mu - 2*sigma^2)*eta*gamma / (delta*(2*mu + eta)*S*) }
      K~ = (S* + I*)/2 + eta/(gamma*S*) * R*^2
           + 2*eta*gamma/(delta*(2*mu + eta)*S*) * (N*^2 + R*^2)

    and the small-noise attracting region has squared radius
    sigma^2 * K~ / m~ (reported when m~ > 0).
    """
    eq = equilibria(p)
    s2 = p.sigma ** 2
    sigma_small = s2 <= p.mu / 2.0
    if eq.e_star is None:
        return ErgodicConditionReport(
            r0_gt_one=False, excess_positive=False, sigma_small=sigma_small,
            m_tilde=None, k_tilde=None, region_radius_sq=None,
        )
    s_star, i_star, r_star = eq.e_star
    n_star = eq.n_star
    excess_positive = eq.excess > 0.0
    m_tilde = k_tilde = region = None
    if p.gamma > 0.0 and p.delta > 0.0:
        m_tilde = min(
            p.mu - p.eta * r_star / s_star,
            p.eta / (p.gamma * s_star)
            * (p.gamma + p.mu + p.eta - s2
               + p.delta * (p.mu + p.eta - 2.0 * s2) / (2.0 * p.mu + p.eta)),
            (p.mu - 2.0 * s2) * p.eta * p.gamma
            / (p.delta * (2.0 * p.mu + p.eta) * s_star),
        )
        k_tilde = (0.5 * (s_star + i_star)
                   + p.eta / (p.gamma * s_star) * r_star ** 2
                   + 2.0 * p.eta * p.gamma / (p.delta * (2.0 * p.mu + p.eta) * s_star)
                   * (n_star ** 2 + r_star ** 2))
        if m_tilde > 0.0:
            region = s2 * k_tilde / m_tilde
    return ErgodicConditionReport(
        r0_gt_one=True,
        excess_positive=excess_positive,
        sigma_small=sigma_small,
        m_tilde=m_tilde,
        k_tilde=k_tilde,
        region_radius_sq=region,
    )
