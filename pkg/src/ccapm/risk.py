"""Risk-behaviour classification with a sufficiency factor eta.

An investor compares the certain utility ``u(w_t)`` with the discounted,
eta-scaled expected utility ``beta * eta * E[u(w_{t+1})]``.  The utility
allocated for model insufficiency is ``(eta - 1) * E[u]``; its sign, not
the sign of ``eta - 1``, decides whether the allocation is positive,
because CRRA utility is negative for rho > 1.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError
from .model import crra_utility

REL_TOL = 1e-12


class Comparison(str, enum.Enum):
    GREATER = "greater"
    EQUAL = "equal"
    LESS = "less"


class RiskClass(str, enum.Enum):
    RISK_AVERSE = "risk_averse"
    RISK_LOVING = "risk_loving"
    NOT_ENOUGH_RISK_LOVING = "not_enough_risk_loving"
    RISK_NEUTRAL = "risk_neutral"
    UNCLASSIFIED = "unclassified"


class CurvePosition(str, enum.Enum):
    BELOW = "below"
    ABOVE = "above"
    COINCIDENT = "coincident"


@dataclass(frozen=True)
class RiskAssessment:
    certain_utility: float
    expected_utility: float
    beta: float
    eta: float
    allocation: float
    comparison: Comparison
    classification: RiskClass

    @property
    def discounted_utility(self) -> float:
        return self.beta * self.eta * self.expected_utility

    def as_dict(self) -> dict:
        return {
            "certain_utility": self.certain_utility,
            "expected_utility": self.expected_utility,
            "beta": self.beta,
            "eta": self.eta,
            "discounted_utility": self.discounted_utility,
            "allocation": self.allocation,
            "comparison": self.comparison.value,
            "classification": self.classification.value,
        }


def compare(a: float, b: float, rel_tol: float = REL_TOL) -> Comparison:
    # relative tolerance keeps the outcome invariant to rescaling utilities
    if abs(a - b) <= rel_tol * max(abs(a), abs(b)):
        return Comparison.EQUAL
    return Comparison.GREATER if a > b else Comparison.LESS


def classify(certain_utility: float, expected_utility: float, beta: float,
             eta: float) -> RiskAssessment:
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    allocation = (eta - 1.0) * expected_utility
    cmp = compare(certain_utility, beta * eta * expected_utility)

    if cmp is Comparison.EQUAL:
        cls = RiskClass.RISK_NEUTRAL
    elif allocation <= 0.0 and cmp is Comparison.GREATER:
        cls = RiskClass.RISK_AVERSE
    elif allocation > 0.0 and cmp is Comparison.LESS:
        cls = RiskClass.RISK_LOVING
    elif allocation > 0.0:
        cls = RiskClass.NOT_ENOUGH_RISK_LOVING
    else:
        # non-positive allocation yet uncertain utility wins: no definition covers it
        cls = RiskClass.UNCLASSIFIED
    return RiskAssessment(certain_utility, expected_utility, beta, eta, allocation, cmp, cls)


def classify_wealth(wealth: float, future_wealth: float, rho: float, beta: float,
                    eta: float) -> RiskAssessment:
    """Classify with CRRA utilities of a certain and a (point-forecast) future wealth."""
    return classify(crra_utility(wealth, rho)[0], crra_utility(future_wealth, rho)[0], beta, eta)


def curve_position(eta: float, rho: float) -> CurvePosition:
    """Where ``eta * u(w)`` lies relative to ``u(w)`` for CRRA utility with ``rho``."""
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    if rho < 0:
        raise DomainError(f"rho must be non-negative, got {rho!r}")
    if rho == 1.0:
        raise DomainError("rho = 1: eta*ln(w) crosses ln(w) at w = 1, no single position")
    if eta == 1.0:
        return CurvePosition.COINCIDENT
    s = (eta - 1.0) * (1.0 - rho)
    return CurvePosition.BELOW if s < 0 else CurvePosition.ABOVE


def risk_premium_approx(variance: float, wealth: float, rho: float) -> float:
    """Arrow-Pratt premium 0.5 * variance * A(w) with CRRA absolute risk aversion rho/w."""
    if not wealth > 0:
        raise DomainError(f"wealth must be positive, got {wealth!r}")
    if variance < 0:
        raise DomainError(f"gamble variance must be non-negative, got {variance!r}")
    return 0.5 * variance * rho / wealth


CURVE_COLUMNS = ("w", "u", "eta_u", "beta_eta_u")


def curve_samples(rho: float, eta: float, beta: float, wealth_grid: Iterable[float]) -> list[tuple]:
    rows = []
    for w in wealth_grid:
        u = crra_utility(float(w), rho)[0]
        rows.append((float(w), u, eta * u, beta * eta * u))
    return rows


def wealth_grid(start: float, stop: float, points: int) -> np.ndarray:
    if not (start > 0 and stop > start and points >= 2):
        raise DomainError("grid needs 0 < start < stop and at least 2 points")
    return np.linspace(start, stop, points)


def format_curve_table(rows, delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in rows:
        writer.writerow([repr(v) for v in row])
    return buf.getvalue()
