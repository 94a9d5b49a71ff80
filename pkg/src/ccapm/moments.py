"""Growth moments and summary statistics from annual series."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DomainError
from .model import EconomySummary, GrowthMoments

POPULATION = 0  # divisor n
SAMPLE = 1  # divisor n - 1


@dataclass(frozen=True)
class AnnualSeries:
    periods: tuple
    consumption: tuple
    equity_return: tuple | None = None
    rf_return: tuple | None = None
    dividends: tuple | None = None

    def __post_init__(self):
        n = len(self.consumption)
        if n < 2:
            raise DataError(f"need at least 2 observations, got {n}")
        if len(self.periods) != n:
            raise DataError("periods and consumption differ in length")
        if any(b <= a for a, b in zip(self.periods, self.periods[1:])):
            raise DataError("period labels must be strictly increasing")
        for name in ("consumption", "equity_return", "rf_return", "dividends"):
            col = getattr(self, name)
            if col is None:
                continue
            if len(col) != n:
                raise DataError(f"column {name!r} has length {len(col)}, expected {n}")
            for i, value in enumerate(col):
                if not (value > 0 and math.isfinite(value)):
                    raise DomainError(
                        f"{name} must be positive and finite; got {value!r} at index {i}"
                    )

    @classmethod
    def from_columns(cls, consumption: Sequence[float], periods=None, **optional):
        periods = tuple(range(len(consumption))) if periods is None else tuple(periods)
        cols = {k: (None if v is None else tuple(float(x) for x in v)) for k, v in optional.items()}
        return cls(periods, tuple(float(c) for c in consumption), **cols)

    def __len__(self):
        return len(self.consumption)

    def log_growth(self, column: str = "consumption") -> np.ndarray:
        return np.diff(np.log(np.asarray(getattr(self, column), dtype=float)))


def estimate_moments(series: AnnualSeries, ddof: int = POPULATION) -> GrowthMoments:
    """Sample moments of log consumption and dividend growth.

    Without a dividend column, dividend growth is identified with
    consumption growth, so ``cov_xz == var_x`` and ``mu_z == mu_x``.
    """
    lx = series.log_growth("consumption")
    if ddof >= len(lx):
        raise DataError(f"{len(lx)} growth observations are too few for ddof={ddof}")
    mu_x = float(np.mean(lx))
    var_x = float(np.var(lx, ddof=ddof))
    if series.dividends is None:
        return GrowthMoments.equilibrium(mu_x, var_x)
    lz = series.log_growth("dividends")
    cov = float(np.cov(lx, lz, ddof=ddof)[0, 1])
    return GrowthMoments(mu_x, var_x, float(np.mean(lz)), float(np.var(lz, ddof=ddof)), cov)


def moments_from_summary(mean_growth: float, sd_growth: float) -> tuple[float, float]:
    """Invert the gross mean and sd of a lognormal variable to (mu, var) of its log."""
    if not mean_growth > 0:
        raise DomainError(f"mean growth must be positive, got {mean_growth!r}")
    if sd_growth < 0:
        raise DomainError(f"sd of growth must be non-negative, got {sd_growth!r}")
    var = math.log1p((sd_growth / mean_growth) ** 2)
    return math.log(mean_growth) - 0.5 * var, var


def lognormal_mean_sd(mu: float, var: float) -> tuple[float, float]:
    mean = math.exp(mu + 0.5 * var)
    return mean, mean * math.sqrt(math.expm1(var))


def summary_moments(summary: EconomySummary) -> GrowthMoments:
    return GrowthMoments.equilibrium(*moments_from_summary(summary.mean_growth, summary.sd_growth))


def summarize(series: AnnualSeries, ddof: int = POPULATION) -> EconomySummary:
    """Arithmetic means of gross returns and growth, as in Table 1 of Mehra-Prescott."""
    missing = [c for c in ("equity_return", "rf_return") if getattr(series, c) is None]
    if missing:
        raise DataError(f"summarize needs return columns; missing {', '.join(missing)}")
    c = np.asarray(series.consumption)
    growth = c[1:] / c[:-1]
    re = float(np.mean(series.equity_return))
    rf = float(np.mean(series.rf_return))
    sd = float(np.std(growth, ddof=ddof)) if len(growth) > ddof else 0.0
    return EconomySummary(re, rf, float(np.mean(growth)), sd, re - rf)
