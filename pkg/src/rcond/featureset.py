"""Feature sets and the projection onto ``L2(G) ∩ Phi``.

A feature set is a closed convex set of random vectors known through its
metric projection.  The projection onto its intersection with the
``G``-measurable vectors is computed by Dykstra's alternating scheme.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .core import RandomVector, _cell_average, check_partition, l2_norm
from .errors import ConvergenceError, InvariantError


class FeatureSet(ABC):
    @abstractmethod
    def project(self, X: RandomVector, mu: str = "P") -> RandomVector: ...

    @abstractmethod
    def contains(self, X: RandomVector, mu: str = "P", tol: float = 1e-10) -> bool: ...


class FullSpace(FeatureSet):
    """No constraint: every square-integrable vector is admissible."""

    def project(self, X, mu="P"):
        return X

    def contains(self, X, mu="P", tol=1e-10):
        return True

    def __repr__(self):
        return "FullSpace()"


def _check_radius(radius):
    if not radius > 0:
        raise InvariantError(f"feature-set radius must be positive, got {radius}")


@dataclass(frozen=True)
class VarianceBall(FeatureSet):
    """``{Z : sqrt(E|Z|^2) <= radius}``."""

    radius: float

    def __post_init__(self):
        _check_radius(self.radius)

    def project(self, X, mu="P"):
        return project_variance_ball(X, self.radius, mu)

    def contains(self, X, mu="P", tol=1e-10):
        return l2_norm(X, mu) <= self.radius + tol


@dataclass(frozen=True)
class L1Ball(FeatureSet):
    """Vectors whose every scenario value lies in the closed l1 ball of ``radius``."""

    radius: float

    def __post_init__(self):
        _check_radius(self.radius)

    def project(self, X, mu="P"):
        return project_l1_ball(X, self.radius)

    def contains(self, X, mu="P", tol=1e-10):
        return bool(np.all(np.abs(X.values).sum(axis=1) <= self.radius + tol))


def project_variance_ball(X: RandomVector, radius: float, mu: str = "P") -> RandomVector:
    _check_radius(radius)
    norm = l2_norm(X, mu)
    if norm <= radius:
        return X
    return X * (radius / norm)


def project_l1_ball(X: RandomVector, radius: float) -> RandomVector:
    """Scenario-wise Euclidean projection onto the l1 ball of ``radius``.

    Rows already inside are returned unchanged; the others are
    soft-thresholded at the sort-and-scan water level.
    """
    _check_radius(radius)
    x = X.values
    a = np.abs(x)
    outside = a.sum(axis=1) > radius
    if not np.any(outside):
        return X
    out = x.copy()
    u = -np.sort(-a[outside], axis=1)
    css = np.cumsum(u, axis=1)
    k = np.arange(1, x.shape[1] + 1)
    active = u - (css - radius) / k > 0
    rho = active.sum(axis=1)
    theta = (css[np.arange(rho.size), rho - 1] - radius) / rho
    out[outside] = np.sign(x[outside]) * np.maximum(a[outside] - theta[:, None], 0.0)
    return RandomVector._wrap(X.space, out)


@dataclass
class DykstraState:
    """Iterates of the Dykstra recursion plus the residual history."""

    x_bar: RandomVector
    y_bar: RandomVector
    p: RandomVector
    q: RandomVector
    iteration: int = 0
    residual: float = float("inf")
    history: list = field(default_factory=list)


def dykstra_project(X: RandomVector, phi: FeatureSet, partition=None, mu: str = "P",
                    tol: float = 1e-9, max_iter: int = 10_000, return_state: bool = False):
    """Project ``X`` onto ``L2(G) ∩ Phi`` by Dykstra splitting.

    Stops once successive conditional iterates move less than ``tol`` in
    ``L2(mu)`` and the last ``Phi`` iterate is within ``tol`` of them.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    labels = X.space.partition if partition is None else check_partition(partition, X.n)
    zero = RandomVector._wrap(X.space, np.zeros_like(X.values))
    st = DykstraState(x_bar=X, y_bar=zero, p=zero, q=zero)
    for n in range(max_iter):
        y = phi.project(st.x_bar + st.p, mu)
        p = st.x_bar + st.p - y
        x_new = _cell_average(y + st.q, labels, mu)
        q = y + st.q - x_new
        step = l2_norm(x_new - st.x_bar, mu)
        gap = l2_norm(x_new - y, mu)
        st.x_bar, st.y_bar, st.p, st.q = x_new, y, p, q
        st.iteration = n + 1
        st.residual = max(step, gap)
        st.history.append(st.residual)
        if st.residual < tol:
            return (st.x_bar, st) if return_state else st.x_bar
    raise ConvergenceError(
        f"Dykstra projection did not converge in {max_iter} iterations",
        st.residual, iterate=st.x_bar, trace=st.history,
    )


def phi_relative_cond_exp(X: RandomVector, phi: FeatureSet, partition=None, mu: str = "P",
                          tol: float = 1e-9, max_iter: int = 10_000) -> RandomVector:
    """Nearest ``G``-measurable vector in ``Phi``; the classical conditional
    expectation when ``Phi`` is the full space."""
    return dykstra_project(X, phi, partition, mu, tol, max_iter)
