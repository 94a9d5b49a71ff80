"""Closed-form pricing for the consumption CAPM with sufficiency factors.

Every function takes unconditional lognormal moments of gross consumption
growth ``x`` (and dividend growth ``z``).  With ``zeta = xi = 1`` all
formulas collapse to the standard lognormal CCAPM.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NoFiniteEquilibrium


@dataclass(frozen=True)
class Preferences:
    beta: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not self.rho >= 0.0:
            raise DomainError(f"rho must be non-negative, got {self.rho!r}")


@dataclass(frozen=True)
class SufficiencyFactors:
    zeta: float  # equity investors
    xi: float  # risk-free investors

    def __post_init__(self):
        if not (self.zeta > 0.0 and self.xi > 0.0):
            raise DomainError(f"sufficiency factors must be positive, got {self}")

    @property
    def lnzeta(self) -> float:
        return math.log(self.zeta)

    @property
    def lnxi(self) -> float:
        return math.log(self.xi)


@dataclass(frozen=True)
class GrowthMoments:
    """Moments of log consumption growth (x) and log dividend growth (z)."""

    mu_x: float
    var_x: float
    mu_z: float | None = None
    var_z: float | None = None
    cov_xz: float | None = None

    def __post_init__(self):
        # absent dividend moments mean market clearing: z = x
        if self.mu_z is None:
            object.__setattr__(self, "mu_z", self.mu_x)
        if self.var_z is None:
            object.__setattr__(self, "var_z", self.var_x)
        if self.cov_xz is None:
            object.__setattr__(self, "cov_xz", self.var_x)
        if self.var_x < 0 or self.var_z < 0:
            raise DomainError("log-growth variances must be non-negative")
        bound = math.sqrt(self.var_x) * math.sqrt(self.var_z)  # product may underflow
        if abs(self.cov_xz) > bound * (1 + 1e-12):
            raise DomainError(
                f"|cov_xz| = {abs(self.cov_xz)!r} exceeds sqrt(var_x*var_z) = {bound!r}"
            )

    @classmethod
    def equilibrium(cls, mu_x: float, var_x: float) -> "GrowthMoments":
        return cls(mu_x, var_x, mu_x, var_x, var_x)

    @property
    def mean_growth(self) -> float:
        return lognormal_power_mean(self.mu_x, self.var_x, 1.0)

    @property
    def is_equilibrium(self) -> bool:
        return (self.mu_z == self.mu_x and self.var_z == self.var_x
                and self.cov_xz == self.var_x)


@dataclass(frozen=True)
class EconomySummary:
    """Gross per-period summary statistics in the layout of Mehra-Prescott."""

    mean_equity_return: float
    risk_free_rate: float
    mean_growth: float
    sd_growth: float
    mean_premium: float | None = None

    def __post_init__(self):
        if self.mean_premium is None:
            object.__setattr__(self, "mean_premium",
                               self.mean_equity_return - self.risk_free_rate)
        for name in ("mean_equity_return", "risk_free_rate", "mean_growth"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be a positive gross rate")
        if self.sd_growth < 0:
            raise DomainError("sd_growth must be non-negative")
        gap = self.mean_premium - (self.mean_equity_return - self.risk_free_rate)
        if abs(gap) > 1e-12:
            raise DomainError(f"mean_premium inconsistent with returns by {gap:.3e}")


TABLE1 = EconomySummary(
    mean_equity_return=1.0698,
    risk_free_rate=1.008,
    mean_growth=1.018,
    sd_growth=0.036,
    mean_premium=0.0618,
)
"""U.S. economy, 1889-1978 (Mehra 2008, pp. 19-20)."""


def crra_utility(c: float, rho: float) -> tuple[float, float]:
    """Return ``(u(c), u'(c))`` for CRRA utility; ``rho == 1`` gives log utility."""
    if not c > 0:
        raise DomainError(
            f"consumption must be positive, got {c!r}: zero consumption is never optimal"
        )
    marginal = c ** -rho
    if rho == 1.0:
        return math.log(c), marginal
    return c ** (1.0 - rho) / (1.0 - rho), marginal


def lognormal_power_mean(mu: float, var: float, a: float) -> float:
    """E[x^a] for ln x ~ N(mu, var)."""
    if var < 0:
        raise DomainError(f"log-variance must be non-negative, got {var!r}")
    return math.exp(a * mu + 0.5 * a * a * var)


def dividend_discount_factor(prefs: Preferences, zeta: float, moments: GrowthMoments) -> float:
    """k = beta * zeta * E[x^(1-rho)], the per-period ratio of the price series."""
    return prefs.beta * zeta * lognormal_power_mean(moments.mu_x, moments.var_x, 1.0 - prefs.rho)


def price_dividend_ratio(prefs: Preferences, zeta: float, moments: GrowthMoments) -> float:
    k = dividend_discount_factor(prefs, zeta, moments)
    if k >= 1.0:
        raise NoFiniteEquilibrium(k)
    if k <= 0.0:
        raise DomainError(f"k must be positive, got {k!r}")
    return k / (1.0 - k)


def expected_equity_return(prefs: Preferences, zeta: float, moments: GrowthMoments) -> float:
    """Gross E(R_e) = E(x) / (beta zeta E[x^(1-rho)]) under market clearing."""
    price_dividend_ratio(prefs, zeta, moments)  # raises on divergence
    return moments.mean_growth / dividend_discount_factor(prefs, zeta, moments)


def expected_equity_return_joint(prefs: Preferences, zeta: float, moments: GrowthMoments) -> float:
    """E(R_e) priced off dividend growth z jointly lognormal with x.

    Does not impose z = x; agrees with :func:`expected_equity_return` when
    the moments are at equilibrium.
    """
    rho = prefs.rho
    ez = math.exp(moments.mu_z + 0.5 * moments.var_z)
    # E[z x^-rho]
    ezm = math.exp(moments.mu_z - rho * moments.mu_x
                   + 0.5 * (moments.var_z + rho * rho * moments.var_x
                            - 2.0 * rho * moments.cov_xz))
    k = prefs.beta * zeta * ezm
    if k >= 1.0:
        raise NoFiniteEquilibrium(k)
    return ez / k


def risk_free_rate(prefs: Preferences, xi: float, moments: GrowthMoments) -> float:
    return 1.0 / (prefs.beta * xi * lognormal_power_mean(moments.mu_x, moments.var_x, -prefs.rho))


def log_equity_premium(zeta: float, xi: float, rho: float, var_x: float) -> float:
    """ln E(R_e) - ln R_f."""
    if not (zeta > 0 and xi > 0):
        raise DomainError("sufficiency factors must be positive")
    return math.log(xi) - math.log(zeta) + rho * var_x


def price(prefs: Preferences, factors: SufficiencyFactors, moments: GrowthMoments) -> dict:
    """All pricing outputs for one parameter point, as an ordered dict."""
    v = price_dividend_ratio(prefs, factors.zeta, moments)
    re = expected_equity_return(prefs, factors.zeta, moments)
    rf = risk_free_rate(prefs, factors.xi, moments)
    return {
        "price_dividend_ratio": v,
        "expected_equity_return": re,
        "risk_free_rate": rf,
        "equity_premium": re - rf,
        "log_equity_premium": log_equity_premium(factors.zeta, factors.xi, prefs.rho, moments.var_x),
    }
