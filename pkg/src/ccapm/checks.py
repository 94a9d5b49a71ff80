"""Invariant suite run by ``ccapm check``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import calibration as cal
from . import lucas, model, risk
from .model import TABLE1, GrowthMoments, Preferences, SufficiencyFactors
from .moments import moments_from_summary, summary_moments

PUB_RHO = 1.033526
PUB_ZETA = 0.961745
PUB_XI = 1.019392


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _lognormal_identities():
    rng = np.random.default_rng(11)
    worst = 0.0
    for mu, var in zip(rng.uniform(-0.1, 0.1, 200), rng.uniform(0, 0.01, 200)):
        m1 = model.lognormal_power_mean(mu, var, 1)
        m2 = model.lognormal_power_mean(mu, var, 2)
        worst = max(worst, abs(m1 - math.exp(mu + var / 2)),
                    abs((m2 - m1 * m1) - m1 * m1 * math.expm1(var)))
    return worst <= 1e-12, f"max error {worst:.2e}"


def _summary_inversion():
    mu, var = moments_from_summary(1.018, 0.036)
    err = max(abs(mu - 0.017215), abs(var - 0.001250))
    return err <= 5e-7, f"mu={mu:.6f} var={var:.6f}"


def _targets():
    t = cal.build_targets(TABLE1, 0.99)
    err = max(abs(t.t1 - 0.039582), abs(t.t2 + 0.002082), abs(t.t3 - 0.059504))
    return err <= 2e-6, f"({t.t1:.6f}, {t.t2:.6f}, {t.t3:.6f})"


def _pinned():
    p = cal.solve_pinned(PUB_RHO, cal.build_targets(TABLE1, 0.99))
    err = max(abs(p.zeta - PUB_ZETA), abs(p.xi - PUB_XI))
    return err <= 1e-5, f"zeta={p.zeta:.6f} xi={p.xi:.6f}"


def _round_trip():
    m = summary_moments(TABLE1)
    prefs = Preferences(0.99, PUB_RHO)
    re = model.expected_equity_return(prefs, PUB_ZETA, m)
    rf = model.risk_free_rate(prefs, PUB_XI, m)
    lep = model.log_equity_premium(PUB_ZETA, PUB_XI, PUB_RHO, m.var_x)
    ok = abs(re - 1.0698) <= 1e-4 and abs(rf - 1.008) <= 1e-4 and abs(lep - 0.059504) <= 1e-5
    return ok, f"E(R_e)={re:.6f} R_f={rf:.6f} premium={lep:.6f}"


def _premium_consistency():
    worst = 0.0
    rng = np.random.default_rng(5)
    for _ in range(200):
        m = GrowthMoments.equilibrium(rng.uniform(-0.05, 0.05), rng.uniform(0, 0.01))
        prefs = Preferences(rng.uniform(0.8, 0.99), rng.uniform(0, 5))
        zeta, xi = rng.uniform(0.8, 1.1, 2)
        try:
            re = model.expected_equity_return(prefs, zeta, m)
        except model.NoFiniteEquilibrium:
            continue
        rf = model.risk_free_rate(prefs, xi, m)
        lep = model.log_equity_premium(zeta, xi, prefs.rho, m.var_x)
        worst = max(worst, abs(lep - (math.log(re) - math.log(rf))))
    return worst <= 1e-12, f"max error {worst:.2e}"


def _dependency():
    t = cal.build_targets(TABLE1, 0.99)
    cert = cal.rank_certificate(t)
    const = cal.dependency_constant(t)
    ok = cert.rank == 2 and abs(cert.witness) <= 2e-6 and abs(const) <= 1e-12
    return ok, f"rank={cert.rank} witness={cert.witness:.1e} verdict={cert.verdict!r}"


def _family_closure():
    t = cal.build_targets(TABLE1, 0.99)
    worst = max(float(np.max(np.abs(cal.residuals(p.lnzeta, p.lnxi, rho, t))))
                for rho in np.linspace(0, 10, 50) for p in [cal.solve_pinned(rho, t)])
    return worst <= 1e-12, f"max residual {worst:.2e} over 50 rho in [0, 10]"


def _jacobian_fd():
    t = cal.build_targets(TABLE1, 0.99)
    rng = np.random.default_rng(3)
    h = 1e-6
    worst = 0.0
    for x in np.column_stack([rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100),
                              rng.uniform(0, 10, 100)]):
        J = cal.jacobian(*x, t)
        fd = np.empty((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd[:, j] = (cal.residuals(*(x + e), t) - cal.residuals(*(x - e), t)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(J - fd))))
    return worst <= 1e-7, f"max entry error {worst:.2e}"


def _solver():
    t = cal.build_targets(TABLE1, 0.99)
    rng = np.random.default_rng(17)
    starts = np.column_stack([rng.uniform(-1, 1, 20), rng.uniform(-1, 1, 20),
                              rng.uniform(0, 10, 20)])
    results = cal.solve_multistart(starts, t)
    ok = all(r.converged and r.sse <= 1e-20 and r.family_gap() <= 1e-8 for r in results)
    sse = max(r.sse for r in results)
    gap = max(r.family_gap() for r in results)
    return ok, f"20 starts, max sse {sse:.1e}, max family gap {gap:.1e}"


def _classifier():
    cases = {(0.9, 0.5): "below", (1.1, 2.0): "below", (1.1, 0.5): "above", (0.9, 2.0): "above"}
    ok = all(risk.curve_position(e, r).value == want for (e, r), want in cases.items())
    ex = risk.classify_wealth(2.0, 2.2, 0.5, 0.99, 0.9)
    ok = ok and ex.classification is risk.RiskClass.RISK_AVERSE
    return ok, f"quadrants ok, worked example -> {ex.classification.value}"


def _monte_carlo():
    cfg = lucas.SimulationConfig(summary_moments(TABLE1), Preferences(0.99, PUB_RHO),
                                 SufficiencyFactors(PUB_ZETA, PUB_XI),
                                 draws=200_000, seed=2024, chunk=50_000)
    rep = lucas.simulate(cfg)
    ok = (rep.equity_return.within(rep.closed_equity_return)
          and rep.risk_free_rate.within(rep.closed_risk_free_rate)
          and rep.euler_residual.value <= 1e-12
          and rep.euler_residual_closed.value <= 3 * rep.euler_residual_closed.se
          and rep.cpr_gap <= 1e-10)
    z = (rep.equity_return.value - rep.closed_equity_return) / rep.equity_return.se
    return ok, f"E(R_e) z-score {z:+.2f}, in-sample pricing gap {rep.cpr_gap:.1e}"


def _determinism():
    cfg = lucas.SimulationConfig(summary_moments(TABLE1), Preferences(0.99, 2.0),
                                 SufficiencyFactors(1.0, 1.0), draws=100_000, seed=9, chunk=10_000)
    a = lucas.simulate_growth(cfg, workers=1)[0]
    b = lucas.simulate_growth(cfg, workers=4)[0]
    return bool(np.array_equal(a, b)), "threaded and sequential draws are bit-identical"


CHECKS: list[tuple[str, Callable]] = [
    ("lognormal identities", _lognormal_identities),
    ("summary inversion", _summary_inversion),
    ("calibration targets", _targets),
    ("pinned solution", _pinned),
    ("pricing round trip", _round_trip),
    ("premium consistency", _premium_consistency),
    ("rank deficiency", _dependency),
    ("family closure", _family_closure),
    ("jacobian vs finite differences", _jacobian_fd),
    ("multistart solver", _solver),
    ("classifier", _classifier),
    ("monte carlo agreement", _monte_carlo),
    ("chunked determinism", _determinism),
]


def run_checks() -> list[CheckResult]:
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
