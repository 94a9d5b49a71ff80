"""Consumption-CAPM pricing and calibration with sufficiency factors."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CCAPMError, ConvergenceError, DataError, DomainError, NoFiniteEquilibrium, NumericalError,
)
from .model import (  # noqa: E402
    TABLE1, EconomySummary, GrowthMoments, Preferences, SufficiencyFactors, crra_utility,
    expected_equity_return, log_equity_premium, lognormal_power_mean, price_dividend_ratio,
    risk_free_rate,
)
from .moments import AnnualSeries, estimate_moments, moments_from_summary, summarize  # noqa: E402
from .calibration import (  # noqa: E402
    build_targets, jacobian, rank_certificate, residuals, solve_full, solve_pinned,
)
