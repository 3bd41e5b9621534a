"""Convex risk measures, utility operators and their composites.

The worked instance is the quadratic risk measure, the cash-additive hull
of a quadratic penalty:

    rho2(Z) = E[(E[Z] + 1/2 - Z)^2] - (E[Z] + 1/2) - 1/4

composed with the quadratic loss utility ``U(Y)(w) = -|Y(w)|^2``.
Gradients are Riesz representers in ``L2(mu)``: ``E_mu[grad * H]`` is the
directional derivative along ``H``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    RandomVector,
    check_partition,
    cond_expectation,
    discrete_partition,
    expectation,
    l2_norm,
)
from .errors import CapabilityError, InvariantError
from .splitting import SolverConfig, estimate_beta, forward_backward


def _scalar(Z: RandomVector) -> np.ndarray:
    if Z.dim != 1:
        raise InvariantError(f"risk measures act on scalar random vectors, got D={Z.dim}")
    return Z.values[:, 0]


def rho2_evaluate(Z: RandomVector, mu: str = "P") -> float:
    z = _scalar(Z)
    w = Z.space.weights(mu)
    vz = float(w @ z) + 0.5
    return float(w @ (vz - z) ** 2) - vz - 0.25


def rho2_vz(Z: RandomVector, mu: str = "P") -> float:
    """The minimizing cash amount ``E[Z] + 1/2``."""
    z = _scalar(Z)
    return float(Z.space.weights(mu) @ z) + 0.5


def rho2_gradient(Z: RandomVector, mu: str = "P") -> RandomVector:
    """``2 * (Z - (E[Z] + 1/2))``, the L2(mu) gradient of :func:`rho2_evaluate`.

    Its mean is ``-1`` for every ``Z``, as cash-invariance requires.
    """
    z = _scalar(Z)
    vz = float(Z.space.weights(mu) @ z) + 0.5
    return RandomVector._wrap(Z.space, (2.0 * (z - vz))[:, None])


class RiskMeasure(ABC):
    """A convex risk measure on scalar random vectors."""

    @abstractmethod
    def evaluate(self, Z: RandomVector, mu: str = "P") -> float: ...

    def gradient(self, Z: RandomVector, mu: str = "P") -> RandomVector:
        raise CapabilityError(f"{type(self).__name__} has no Gateaux derivative")


class Quadratic(RiskMeasure):
    """The quadratic risk measure ``rho2``."""

    def evaluate(self, Z, mu="P"):
        return rho2_evaluate(Z, mu)

    def gradient(self, Z, mu="P"):
        return rho2_gradient(Z, mu)

    def vz(self, Z, mu="P"):
        return rho2_vz(Z, mu)

    def __repr__(self):
        return "Quadratic()"


class UtilityOperator(ABC):
    """Maps an estimation error ``Y`` (``N x D``) to a scalar random vector."""

    @abstractmethod
    def map(self, Y: RandomVector) -> RandomVector: ...

    def pullback(self, Y: RandomVector, g: RandomVector) -> RandomVector:
        """Adjoint of the derivative of :meth:`map` at ``Y`` applied to ``g``."""
        raise CapabilityError(f"{type(self).__name__} is not differentiable")


class QuadraticLoss(UtilityOperator):
    """``U(Y)(w) = -|Y(w)|^2``."""

    def map(self, Y):
        return RandomVector._wrap(Y.space, -np.einsum("ij,ij->i", Y.values, Y.values)[:, None])

    def pullback(self, Y, g):
        return RandomVector._wrap(Y.space, -2.0 * Y.values * g.values)

    def __repr__(self):
        return "QuadraticLoss()"


class IdentityUtility(UtilityOperator):
    """``U(Y) = Y`` for scalar ``Y``; turns a composite back into its risk measure."""

    def map(self, Y):
        _scalar(Y)
        return Y

    def pullback(self, Y, g):
        return g

    def __repr__(self):
        return "IdentityUtility()"


@dataclass(frozen=True)
class ThresholdAggregation(UtilityOperator):
    """``U(Y) = max(g(Y), floor)`` for an aggregation ``g: R^D -> R``.

    Provided as an interface hook only; it has no derivative, so solvers that
    need one reject it.
    """

    aggregate: callable
    floor: float

    def map(self, Y):
        agg = np.array([self.aggregate(row) for row in Y.values], dtype=float)
        return RandomVector._wrap(Y.space, np.maximum(agg, self.floor)[:, None])


@dataclass(frozen=True)
class CompositeRisk:
    """``rho o U`` evaluated under ``base_measure``."""

    risk: RiskMeasure
    utility: UtilityOperator
    base_measure: str = "P"

    def evaluate(self, Y: RandomVector) -> float:
        return self.risk.evaluate(self.utility.map(Y), self.base_measure)

    def gradient(self, Y: RandomVector) -> RandomVector:
        return self.utility.pullback(Y, self.risk.gradient(self.utility.map(Y), self.base_measure))

    def probe_bounded_below(self, Y: RandomVector, scales=None) -> bool:
        """Coarse check that the composite is bounded below and coercive along ``t * Y``.

        Values along the ray must stay finite, and the largest scale must not
        undercut the best value seen at small scales.
        """
        if scales is None:
            scales = np.geomspace(1e-3, 1e3, 25)
        vals = np.array([self.evaluate(Y * t) for t in scales])
        if not np.all(np.isfinite(vals)):
            return False
        return bool(vals[-1] >= vals[: len(vals) // 2].min() - 1e-12)


def composite_evaluate(cr: CompositeRisk, Y: RandomVector) -> float:
    return cr.evaluate(Y)


def composite_gradient(cr: CompositeRisk, Y: RandomVector) -> RandomVector:
    """Chain-rule gradient of ``Y -> rho(U(Y))`` in ``L2(base_measure)``.

    For the quadratic pair this is ``4 Y (|Y|^2 - E|Y|^2 + 1/2)``.
    """
    return cr.gradient(Y)


@dataclass(frozen=True)
class MoreauResult:
    value: float
    prox: RandomVector
    gradient: RandomVector
    iterations: int


def moreau_extension(rho: RiskMeasure, eta: float, X: RandomVector, partition=None,
                     mu: str = "P", config: Optional[SolverConfig] = None) -> MoreauResult:
    """Regular approximate extension of ``rho`` with smoothing parameter ``eta``.

    The prox point minimizes ``1/2 E[(X - Z)^2] + eta * rho(Z)`` over
    ``partition``-measurable ``Z``; the value is
    ``rho(prox) + E[(X - prox)^2] / (2 eta)`` and the gradient is
    ``(X - prox) / eta``.  ``partition=None`` means the discrete partition.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    _scalar(X)
    if config is None:
        config = SolverConfig(tol=1e-13)
    labels = discrete_partition(X.n) if partition is None else check_partition(partition, X.n)

    def project(V):
        return cond_expectation(V, labels, mu)

    def grad(Z):
        return (Z - X) + rho.gradient(Z, mu) * eta

    def objective(Z):
        d = X.values - Z.values
        return 0.5 * float(X.space.weights(mu) @ (d[:, 0] ** 2)) + eta * rho.evaluate(Z, mu)

    z0 = project(X)
    gamma0 = config.gamma0
    if gamma0 is None:
        radius = max(l2_norm(X - z0, mu), float(np.abs(expectation(X, mu))[0]), 1.0)
        gamma0 = estimate_beta(grad, project, z0, radius, mu, config.beta_samples, config.seed)
    res = forward_backward(z0, grad, project, objective, gamma0, config, mu)
    prox = res.z
    d = X - prox
    value = rho.evaluate(prox, mu) + l2_norm(d, mu) ** 2 / (2.0 * eta)
    return MoreauResult(value, prox, d / eta, res.iterations)
