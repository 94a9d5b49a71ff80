"""Monte-Carlo Lucas-tree check of the closed-form pricing formulas.

Draws are i.i.d. one-period growth outcomes.  Each chunk of draws comes
from its own Philox (counter-based) substream keyed by ``(seed, chunk
index)``, so the sample is the same whether chunks are generated
sequentially or on a thread pool.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NoFiniteEquilibrium
from . import model
from .model import GrowthMoments, Preferences, SufficiencyFactors

PSD_TOL = 1e-15


@dataclass(frozen=True)
class SimulationConfig:
    moments: GrowthMoments
    prefs: Preferences
    factors: SufficiencyFactors
    draws: int = 1_000_000
    seed: int = 0
    chunk: int | None = None  # draws per substream; None means one chunk

    def __post_init__(self):
        if self.draws < 1:
            raise DomainError("draws must be at least 1")
        if self.chunk is None:
            object.__setattr__(self, "chunk", self.draws)
        if self.chunk < 1 or self.draws % self.chunk:
            raise DomainError(f"chunk {self.chunk} must divide draws {self.draws}")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")

    @property
    def n_chunks(self) -> int:
        return self.draws // self.chunk

    def with_factors(self, zeta=None, xi=None) -> "SimulationConfig":
        f = SufficiencyFactors(self.factors.zeta if zeta is None else zeta,
                               self.factors.xi if xi is None else xi)
        return SimulationConfig(self.moments, self.prefs, f, self.draws, self.seed, self.chunk)


class Estimate(NamedTuple):
    value: float
    se: float

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.se


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _chunk_draws(moments: GrowthMoments, seed: int, index: int, size: int):
    rng = substream(seed, index)
    e = rng.standard_normal((2, size))
    sx = math.sqrt(moments.var_x)
    lx = moments.mu_x + sx * e[0]
    x = np.exp(lx)
    if moments.is_equilibrium:
        return x, x.copy()
    if sx > 0:
        slope = moments.cov_xz / moments.var_x
        resid_var = moments.var_z - moments.cov_xz * slope
    else:
        slope, resid_var = 0.0, moments.var_z
    if resid_var < -PSD_TOL:
        raise DomainError("covariance of (ln x, ln z) is not positive semi-definite")
    lz = moments.mu_z + slope * (lx - moments.mu_x) + math.sqrt(max(resid_var, 0.0)) * e[1]
    return x, np.exp(lz)


def simulate_growth(config: SimulationConfig, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Jointly lognormal draws of gross consumption growth x and dividend growth z."""
    m = config.moments
    if m.var_x * m.var_z - m.cov_xz ** 2 < -PSD_TOL:
        raise DomainError("covariance of (ln x, ln z) is not positive semi-definite")
    jobs = range(config.n_chunks)

    def run(i):
        return _chunk_draws(m, config.seed, i, config.chunk)

    if workers > 1 and config.n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(i) for i in jobs]
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def _se(values: np.ndarray) -> float:
    n = len(values)
    return float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0


def sample_k(config: SimulationConfig, x: np.ndarray) -> float:
    return config.prefs.beta * config.factors.zeta * float(np.mean(x ** (1.0 - config.prefs.rho)))


def mc_equity_return(config: SimulationConfig, x: np.ndarray | None = None) -> Estimate:
    """E(R_e) = mean(x) / k with k estimated from the same draws; delta-method SE."""
    if x is None:
        x = simulate_growth(config)[0]
    b = config.prefs.beta * config.factors.zeta * x ** (1.0 - config.prefs.rho)
    k = float(np.mean(b))
    if k >= 1.0:
        raise NoFiniteEquilibrium(k)
    value = float(np.mean(x)) / k
    return Estimate(value, _se(x - value * b) / k)


def mc_risk_free_rate(config: SimulationConfig, x: np.ndarray | None = None) -> Estimate:
    if x is None:
        x = simulate_growth(config)[0]
    m = x ** -config.prefs.rho
    mbar = float(np.mean(m))
    rf = 1.0 / (config.prefs.beta * config.factors.xi * mbar)
    return Estimate(rf, rf * _se(m) / mbar)


def euler_residual(config: SimulationConfig, x: np.ndarray | None = None,
                   v: float | str = "sample") -> Estimate:
    """|beta zeta mean(x^-rho R_e) - 1| with R_e = (v+1)/v x.

    ``v`` is ``"sample"`` (priced from the same draws, so the residual is
    zero up to rounding), ``"closed"`` (closed-form ratio), or a number.
    """
    if x is None:
        x = simulate_growth(config)[0]
    p, zeta = config.prefs, config.factors.zeta
    if v == "sample":
        k = sample_k(config, x)
        if k >= 1.0:
            raise NoFiniteEquilibrium(k)
        v = k / (1.0 - k)
    elif v == "closed":
        v = model.price_dividend_ratio(p, zeta, config.moments)
    re = (v + 1.0) / v * x
    vals = p.beta * zeta * x ** -p.rho * re
    return Estimate(abs(float(np.mean(vals)) - 1.0), _se(vals))


def _pricing_gap(zeta, xi, beta, rf, m, re) -> float:
    lhs = xi * rf - zeta * float(np.mean(re))
    cov = float(np.mean(m * re) - np.mean(m) * np.mean(re))
    rhs = beta * zeta * xi * rf * cov
    return lhs - rhs


def central_pricing_check(config: SimulationConfig, x: np.ndarray | None = None,
                          moments: str = "sample", batches: int = 100) -> Estimate:
    """Gap between the two sides of xi R_f - zeta E(R_e) = beta zeta xi R_f cov(m, R_e).

    With ``moments="sample"`` every moment comes from the same draws and the
    identity is exact up to rounding.  With ``moments="population"`` the
    price-dividend ratio and R_f are closed-form and the SE is from batch
    means over ``batches`` contiguous slices.
    """
    if x is None:
        x = simulate_growth(config)[0]
    p, f = config.prefs, config.factors
    m = x ** -p.rho
    if moments == "sample":
        k = sample_k(config, x)
        if k >= 1.0:
            raise NoFiniteEquilibrium(k)
        re = x / k
        rf = 1.0 / (p.beta * f.xi * float(np.mean(m)))
        cov = float(np.mean((m - m.mean()) * (re - re.mean())))
        lhs = f.xi * rf - f.zeta * float(np.mean(re))
        gap = lhs - p.beta * f.zeta * f.xi * rf * cov
        return Estimate(abs(gap), 0.0)
    if moments != "population":
        raise ValueError(f"moments must be 'sample' or 'population', got {moments!r}")
    v = model.price_dividend_ratio(p, f.zeta, config.moments)
    rf = model.risk_free_rate(p, f.xi, config.moments)
    re = (v + 1.0) / v * x
    gap = _pricing_gap(f.zeta, f.xi, p.beta, rf, m, re)
    nb = min(batches, len(x))
    parts = [_pricing_gap(f.zeta, f.xi, p.beta, rf, mb, rb)
             for mb, rb in zip(np.array_split(m, nb), np.array_split(re, nb))]
    se = float(np.std(parts, ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    return Estimate(abs(gap), se)


@dataclass(frozen=True)
class SimulationReport:
    draws: int
    seed: int
    chunk: int
    mean_log_growth: Estimate
    equity_return: Estimate
    closed_equity_return: float
    risk_free_rate: Estimate
    closed_risk_free_rate: float
    euler_residual: Estimate
    euler_residual_closed: Estimate
    cpr_gap: float
    cpr_gap_population: Estimate

    def as_dict(self) -> dict:
        def est(e):
            return {"value": e.value, "se": e.se}

        return {
            "draws": self.draws,
            "seed": self.seed,
            "chunk": self.chunk,
            "mean_log_growth": est(self.mean_log_growth),
            "equity_return": est(self.equity_return),
            "closed_equity_return": self.closed_equity_return,
            "risk_free_rate": est(self.risk_free_rate),
            "closed_risk_free_rate": self.closed_risk_free_rate,
            "euler_residual": est(self.euler_residual),
            "euler_residual_closed": est(self.euler_residual_closed),
            "cpr_gap": self.cpr_gap,
            "cpr_gap_population": est(self.cpr_gap_population),
        }


def simulate(config: SimulationConfig, workers: int = 1) -> SimulationReport:
    x, _ = simulate_growth(config, workers)
    p, f = config.prefs, config.factors
    lx = np.log(x)
    return SimulationReport(
        draws=config.draws,
        seed=config.seed,
        chunk=config.chunk,
        mean_log_growth=Estimate(float(np.mean(lx)), _se(lx)),
        equity_return=mc_equity_return(config, x),
        closed_equity_return=model.expected_equity_return(p, f.zeta, config.moments),
        risk_free_rate=mc_risk_free_rate(config, x),
        closed_risk_free_rate=model.risk_free_rate(p, f.xi, config.moments),
        euler_residual=euler_residual(config, x, "sample"),
        euler_residual_closed=euler_residual(config, x, "closed"),
        cpr_gap=central_pricing_check(config, x, "sample").value,
        cpr_gap_population=central_pricing_check(config, x, "population"),
    )
