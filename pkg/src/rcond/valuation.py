"""Risk-averse valuation of a European call under Black-Scholes dynamics.

Terminal prices are simulated on a finite scenario space carrying both the
objective measure P and the risk-neutral measure Q.  The risk-averse value
of a discounted payoff is its R-conditioning onto the time-0 information,
which reduces to the classical risk-neutral price when the aversion weight
vanishes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import RandomVector, ScenarioSpace, cond_expectation, expectation
from .errors import ConfigurationError
from .featureset import FullSpace
from .risk import Quadratic, QuadraticLoss, rho2_evaluate
from .solver import RiskPerspective, SolveResult, fbs_solve, lambda_sweep, reparameterize
from .splitting import SolverConfig


@dataclass(frozen=True)
class GBMParams:
    """Black-Scholes model and contract. ``mu=None`` means drift ``r``."""

    x0: float = 1.0
    mu: Optional[float] = None
    sigma: float = 0.1
    r: float = 0.0175
    T: float = 10.0
    K: float = 0.2
    n_paths: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not self.x0 > 0:
            raise ConfigurationError("x0 must be positive")
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")
        if not self.r >= 0:
            raise ConfigurationError("r must be non-negative")
        if not self.T > 0:
            raise ConfigurationError("T must be positive")
        if not self.K > 0:
            raise ConfigurationError("K must be positive")
        if int(self.n_paths) != self.n_paths or self.n_paths < 2:
            raise ConfigurationError("n_paths must be an integer >= 2")

    @property
    def drift(self) -> float:
        return self.r if self.mu is None else self.mu


def _log_density(logx, x0, a, sigma, T):
    m = math.log(x0) + (a - 0.5 * sigma ** 2) * T
    return -((logx - m) ** 2) / (2 * sigma ** 2 * T)


def simulate_gbm_terminal(params: GBMParams, measure_mode: str = "Q"):
    """Seeded terminal prices ``X_T`` and the space carrying both measures.

    Paths are drawn with drift ``r`` (mode ``"Q"``) or ``mu`` (mode ``"P"``)
    and get equal weights under that measure.  The other measure is the
    likelihood-ratio reweighting of the same sample, exact for the terminal
    lognormal marginal.
    """
    if measure_mode not in ("P", "Q"):
        raise ConfigurationError(f"measure_mode must be 'P' or 'Q', got {measure_mode!r}")
    rng = np.random.default_rng(params.seed)
    xi = rng.standard_normal(int(params.n_paths))
    a_sim = params.r if measure_mode == "Q" else params.drift
    a_other = params.drift if measure_mode == "Q" else params.r
    s, T = params.sigma, params.T
    logx = math.log(params.x0) + (a_sim - 0.5 * s * s) * T + s * math.sqrt(T) * xi
    equal = np.full(xi.size, 1.0 / xi.size)
    if a_other == a_sim:
        other = equal
    else:
        lr = _log_density(logx, params.x0, a_other, s, T) - _log_density(logx, params.x0, a_sim, s, T)
        # nearly singular measures (tiny sigma) would underflow to zero weight
        other = np.maximum(np.exp(lr - lr.max()), 1e-300)
    wp, wq = (other, equal) if measure_mode == "Q" else (equal, other)
    space = ScenarioSpace(wp, wq)
    return space, RandomVector(space, np.exp(logx))


def vanilla_payoff(X_T: RandomVector, K: float, r: float, T: float) -> RandomVector:
    """Discounted call payoff ``exp(-r T) max(x - K, 0)`` per scenario."""
    v = math.exp(-r * T) * np.maximum(X_T.scalar - K, 0.0)
    return RandomVector._wrap(X_T.space, v[:, None])


def _norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bsm_closed_form(params: GBMParams) -> float:
    """Black-Scholes-Merton call value."""
    x0, K, r, s, T = params.x0, params.K, params.r, params.sigma, params.T
    sd = s * math.sqrt(T)
    d1 = (math.log(x0 / K) + (r + 0.5 * s * s) * T) / sd
    d2 = d1 - sd
    return x0 * _norm_cdf(d1) - K * math.exp(-r * T) * _norm_cdf(d2)


def risk_neutral_value(payoff: RandomVector, partition=None) -> RandomVector:
    return cond_expectation(payoff, partition, "Q")


def mc_standard_error(payoff: RandomVector, mu: str = "Q") -> float:
    w = payoff.space.weights(mu)
    f = payoff.scalar
    m = float(w @ f)
    return float(np.sqrt(np.sum(w * w * (f - m) ** 2)))


def valuation_perspective(lam: float = 0.0) -> RiskPerspective:
    """Time-0 information, quadratic risk and loss, no feature constraint,
    everything under Q."""
    return RiskPerspective(None, Quadratic(), QuadraticLoss(), FullSpace(), lam, "Q", "Q")


def risk_averse_value(payoff: RandomVector, perspective: RiskPerspective,
                      config: Optional[SolverConfig] = None) -> SolveResult:
    return fbs_solve(payoff, perspective, config)


def mispricing_risk(payoff: RandomVector, Z: RandomVector, perspective: RiskPerspective) -> float:
    return perspective.composite.evaluate(payoff - Z)


def estimator_risk(Z: RandomVector, perspective: RiskPerspective) -> float:
    return rho2_evaluate(Z, perspective.base_measure)


@dataclass(frozen=True)
class ValuationReport:
    lam: float
    lambda_tilde: float
    option_value_ra: float
    option_value_rn: float
    estimator_risk_ra: float
    estimator_risk_rn: float
    mispricing_risk_ra: float
    mispricing_risk_rn: float
    M_lambda: float
    mc_std_error: float
    converged: bool = True

    @property
    def ratio_value(self) -> float:
        return self.option_value_ra / self.option_value_rn

    @property
    def ratio_estimator(self) -> float:
        return self.estimator_risk_ra / self.estimator_risk_rn

    @property
    def ratio_mispricing(self) -> float:
        return self.mispricing_risk_ra / self.mispricing_risk_rn

    def row(self) -> dict:
        return {
            "lambda": self.lam,
            "lambda_tilde": self.lambda_tilde,
            "value_ra": self.option_value_ra,
            "value_rn": self.option_value_rn,
            "ratio_value": self.ratio_value,
            "risk_est_ra": self.estimator_risk_ra,
            "risk_est_rn": self.estimator_risk_rn,
            "ratio_est": self.ratio_estimator,
            "misprice_ra": self.mispricing_risk_ra,
            "misprice_rn": self.mispricing_risk_rn,
            "ratio_misprice": self.ratio_mispricing,
            "M_lambda": self.M_lambda,
            "mc_se": self.mc_std_error,
        }


REPORT_COLUMNS = [
    "lambda", "lambda_tilde", "value_ra", "value_rn", "ratio_value", "risk_est_ra",
    "risk_est_rn", "ratio_est", "misprice_ra", "misprice_rn", "ratio_misprice",
    "M_lambda", "mc_se",
]


def _value_of(Z: RandomVector) -> float:
    # the time-0 value: Z is constant under the trivial partition
    return float(expectation(Z, "Q")[0])


def table_report(params: GBMParams, lambdas, template: Optional[RiskPerspective] = None,
                 config: Optional[SolverConfig] = None, payoff: Optional[RandomVector] = None) -> list:
    """One :class:`ValuationReport` per aversion weight in ascending ``lambdas``.

    ``lambdas`` are weights in ``[0, 1)``; convert from the unbounded
    parameterization with :func:`~rcond.solver.lambda_from_tilde`.
    """
    template = template or valuation_perspective()
    if payoff is None:
        _, X_T = simulate_gbm_terminal(params, "Q")
        payoff = vanilla_payoff(X_T, params.K, params.r, params.T)
    rn = risk_neutral_value(payoff, template.labels(payoff))
    persp0 = template.with_lambda(0.0)
    value_rn = _value_of(rn)
    est_rn = estimator_risk(rn, persp0)
    mis_rn = mispricing_risk(payoff, rn, persp0)
    se = mc_standard_error(payoff, "Q")
    reports = []
    for res in lambda_sweep(payoff, template, lambdas, config):
        p = template.with_lambda(res.lam)
        reports.append(ValuationReport(
            lam=res.lam,
            lambda_tilde=reparameterize(res.lam),
            option_value_ra=_value_of(res.Z_star),
            option_value_rn=value_rn,
            estimator_risk_ra=estimator_risk(res.Z_star, p),
            estimator_risk_rn=est_rn,
            mispricing_risk_ra=mispricing_risk(payoff, res.Z_star, p),
            mispricing_risk_rn=mis_rn,
            M_lambda=res.M_lambda,
            mc_std_error=se,
            converged=res.converged,
        ))
    return reports


def write_report_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for rep in reports:
            w.writerow([repr(float(v)) for v in rep.row().values()])


def _json_safe(v):
    v = float(v)
    return v if math.isfinite(v) else None


def write_report_json(reports, path) -> None:
    rows = [{k: _json_safe(v) for k, v in rep.row().items()} for rep in reports]
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_value_curve_csv(reports, path) -> None:
    """Plot-ready ``(lambda_tilde, value_ra)`` pairs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda_tilde", "value_ra"])
        for rep in reports:
            w.writerow([repr(float(rep.lambda_tilde)), repr(float(rep.option_value_ra))])


def params_dict(params: GBMParams) -> dict:
    return asdict(params)
