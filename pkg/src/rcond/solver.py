"""R-conditioning by proximal forward-backward splitting.

For a risk perspective with weight ``lam`` in ``[0, 1)`` the R-conditioning
of ``X`` is the unique minimizer over ``Z`` in ``L2(G) ∩ Phi`` of

    (1 - lam) * E_c|X - Z|^2 + lam * rho(U(X - Z))

where ``E_c`` is taken under the conditioning measure and ``rho`` under the
base measure.  The solver runs forward-backward splitting on the
equivalent scaled problem ``1/2 E_c|X - Z|^2 + kappa * rho(U(X - Z))`` with
``kappa = lam / (2 (1 - lam))``, projecting with the Phi-relative
conditional expectation.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import RandomVector, ScenarioSpace, check_partition, is_measurable, l2_norm
from .errors import CapabilityError, ConfigurationError, ConvergenceError, InfeasibleError
from .featureset import FeatureSet, FullSpace, phi_relative_cond_exp
from .risk import CompositeRisk, Quadratic, QuadraticLoss, RiskMeasure, UtilityOperator
from .splitting import SolverConfig, estimate_beta, forward_backward


def reparameterize(lam: float) -> float:
    """``lam -> 2 lam / (1 - lam)``."""
    if not 0 <= lam < 1:
        raise ConfigurationError(f"lambda must lie in [0, 1), got {lam}")
    return 2.0 * lam / (1.0 - lam)


def lambda_from_tilde(lambda_tilde: float) -> float:
    """Inverse of :func:`reparameterize`."""
    if not lambda_tilde >= 0 or not np.isfinite(lambda_tilde):
        raise ConfigurationError(f"lambda_tilde must be finite and >= 0, got {lambda_tilde}")
    return lambda_tilde / (lambda_tilde + 2.0)


@dataclass(frozen=True)
class RiskPerspective:
    """The data ``(G, rho, U, Phi, lam)`` defining an R-conditioning problem.

    ``partition=None`` means "the default partition of the space of ``X``".
    """

    partition: Optional[np.ndarray] = None
    rho: RiskMeasure = field(default_factory=Quadratic)
    utility: UtilityOperator = field(default_factory=QuadraticLoss)
    phi: FeatureSet = field(default_factory=FullSpace)
    lam: float = 0.0
    base_measure: str = "P"
    conditioning_measure: str = "P"

    def __post_init__(self):
        if not 0 <= self.lam < 1:
            raise ConfigurationError(f"lambda must lie in [0, 1), got {self.lam}")
        if self.partition is not None:
            labels = check_partition(self.partition, len(self.partition))
            object.__setattr__(self, "partition", labels)
            # one Dykstra probe: L2(G) ∩ Phi must be reachable
            probe = RandomVector.constant(ScenarioSpace.uniform(labels.size), 1.0)
            try:
                phi_relative_cond_exp(probe, self.phi, labels, "P")
            except ConvergenceError as exc:
                raise InfeasibleError(f"L2(G) ∩ Phi looks empty: {exc}") from exc

    @property
    def lambda_tilde(self) -> float:
        return reparameterize(self.lam)

    @property
    def composite(self) -> CompositeRisk:
        return CompositeRisk(self.rho, self.utility, self.base_measure)

    def with_lambda(self, lam: float) -> "RiskPerspective":
        return dataclasses.replace(self, lam=lam)

    def labels(self, X: RandomVector) -> np.ndarray:
        if self.partition is None:
            return X.space.partition
        return check_partition(self.partition, X.n)


def objective(X: RandomVector, Z: RandomVector, perspective: RiskPerspective) -> float:
    """``(1 - lam) E_c|X - Z|^2 + lam rho(U(X - Z))``; feasibility is not checked."""
    Y = X - Z
    mse = l2_norm(Y, perspective.conditioning_measure) ** 2
    if perspective.lam == 0:
        return mse
    return (1 - perspective.lam) * mse + perspective.lam * perspective.composite.evaluate(Y)


def feasibility(Z: RandomVector, perspective: RiskPerspective, tol: float = 1e-8):
    """``(is G-measurable, is in Phi)`` within ``tol``."""
    labels = perspective.labels(Z)
    return (is_measurable(Z, labels, tol),
            perspective.phi.contains(Z, perspective.conditioning_measure, tol))


@dataclass
class SolveResult:
    Z_star: RandomVector
    iterations: int
    residual: float
    objective: float
    M_lambda: float
    lam: float
    risk: float
    converged: bool = True
    trace: list = field(default_factory=list, repr=False)

    @property
    def lambda_tilde(self) -> float:
        return reparameterize(self.lam)

    def row(self) -> dict:
        return {
            "lambda": self.lam,
            "lambda_tilde": self.lambda_tilde,
            "objective": self.objective,
            "M_lambda": self.M_lambda,
            "risk": self.risk,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
        }


def m_lambda(lam: float, risk: float) -> float:
    """Implied risk-aversion level ``(1 - lam) / (2 lam) * risk``; ``inf`` at ``lam = 0``."""
    if lam == 0:
        return float("inf")
    return (1 - lam) / (2 * lam) * risk


def write_trace_csv(result: SolveResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective", "residual"])
        for it, obj, res in result.trace:
            w.writerow([it, repr(float(obj)), repr(float(res))])


def _make_result(X, Z, perspective, iterations, residual, converged, trace):
    risk = perspective.composite.evaluate(X - Z)
    return SolveResult(
        Z_star=Z,
        iterations=iterations,
        residual=residual,
        objective=objective(X, Z, perspective),
        M_lambda=m_lambda(perspective.lam, risk),
        lam=perspective.lam,
        risk=risk,
        converged=converged,
        trace=trace,
    )


def fbs_solve(X: RandomVector, perspective: RiskPerspective,
              config: Optional[SolverConfig] = None, z0: Optional[RandomVector] = None) -> SolveResult:
    """Compute the R-conditioning of ``X``.

    The iteration starts from the Phi-relative conditional expectation of
    ``X`` (or from ``z0`` when warm-starting) and stops when successive
    iterates move less than ``config.tol`` in ``L2``.  Raises
    :class:`ConvergenceError` on hitting ``config.max_iter`` and
    :class:`InfeasibleError` if ``L2(G) ∩ Phi`` cannot be reached.
    """
    config = config or SolverConfig()
    labels = perspective.labels(X)
    mu_c = perspective.conditioning_measure
    mu_b = perspective.base_measure
    phi = perspective.phi

    def project(V):
        return phi_relative_cond_exp(V, phi, labels, mu_c, config.dykstra_tol, config.dykstra_max_iter)

    try:
        z_init = project(X)
    except ConvergenceError as exc:
        raise InfeasibleError(f"no point of L2(G) ∩ Phi reached: {exc}") from exc

    lam = perspective.lam
    if lam == 0:
        return _make_result(X, z_init, perspective, 1, 0.0, True, [])

    composite = perspective.composite
    try:
        composite.gradient(X - z_init)
    except CapabilityError as exc:
        raise CapabilityError(f"forward-backward needs a differentiable composite: {exc}") from exc

    kappa = lam / (2.0 * (1.0 - lam))
    w_c = X.space.weights(mu_c)
    ratio = None if mu_b == mu_c else (X.space.weights(mu_b) / w_c)[:, None]

    def grad(Z):
        g = composite.gradient(X - Z)
        if ratio is not None:
            g = RandomVector._wrap(X.space, g.values * ratio)
        return (Z - X) - g * kappa

    def h(Z):
        d = X.values - Z.values
        return 0.5 * float(w_c @ np.einsum("ij,ij->i", d, d)) + kappa * composite.evaluate(X - Z)

    start = z_init if z0 is None else project(z0)
    gamma0 = config.gamma0
    if gamma0 is None:
        radius = max(l2_norm(X - z_init, mu_c), l2_norm(start - z_init, mu_c), 1e-3)
        gamma0 = estimate_beta(grad, project, start, radius, mu_c, config.beta_samples, config.seed)
    res = forward_backward(start, grad, project, h, gamma0, config, mu_c)
    trace = [(it, 2 * (1 - lam) * val, r) for it, val, r in res.trace]
    return _make_result(X, res.z, perspective, res.iterations, res.residual, True, trace)


def lambda_sweep(X: RandomVector, template: RiskPerspective, lambdas,
                 config: Optional[SolverConfig] = None, warm_start: bool = True) -> list:
    """One solve per ``lam`` in ascending ``lambdas``, warm-started from the previous point.

    A point that fails to converge is kept with ``converged=False`` and the
    sweep carries on.
    """
    lambdas = [float(v) for v in lambdas]
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ConfigurationError("lambdas must be sorted ascending")
    results = []
    z_prev = None
    for lam in lambdas:
        p = template.with_lambda(lam)
        try:
            r = fbs_solve(X, p, config, z0=z_prev if warm_start else None)
        except ConvergenceError as exc:
            Z = exc.iterate if exc.iterate is not None else X
            r = _make_result(X, Z, p, len(exc.trace) - 1, exc.residual, False, exc.trace)
        results.append(r)
        z_prev = r.Z_star
    return results


@dataclass
class LimitResult:
    final: SolveResult
    trajectory: list


def weierstrass_probe(X: RandomVector, perspective: RiskPerspective, n_probes: int = 20,
                      seed: int = 0) -> bool:
    """Coarse check that ``Z -> rho(U(X - Z))`` is bounded below and coercive
    along random feasible directions."""
    rng = np.random.default_rng(seed)
    labels = perspective.labels(X)
    composite = perspective.composite
    for _ in range(n_probes):
        V = RandomVector._wrap(X.space, rng.standard_normal(X.values.shape))
        V = phi_relative_cond_exp(V, FullSpace(), labels, perspective.conditioning_measure)
        if not composite.probe_bounded_below(X - V):
            return False
    return True


def sublinear_limit_solve(X: RandomVector, template: RiskPerspective, n_max: int,
                          config: Optional[SolverConfig] = None) -> LimitResult:
    """Approach the penalized sublinear-expectation problem through ``lam_n = n / (2 + n)``."""
    if n_max < 1:
        raise ConfigurationError("n_max must be at least 1")
    if not weierstrass_probe(X, template):
        raise ConfigurationError("risk perspective failed the boundedness probe")
    lambdas = [n / (2.0 + n) for n in range(1, n_max + 1)]
    traj = lambda_sweep(X, template, lambdas, config)
    return LimitResult(traj[-1], traj)
