"""Probably-sparse random vectors and sparse conditional expectation.

A random vector is ``(epsilon, d)``-sparse when, with probability at least
``epsilon``, at most ``d`` of its coordinates are nonzero.  Conditioning
relative to an l1 feature set soft-thresholds every scenario, so it can only
raise that probability.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import RandomVector, ScenarioSpace, check_partition, is_measurable
from .errors import InvariantError
from .featureset import L1Ball, phi_relative_cond_exp

ZERO_TOL = 1e-12


def l0_count(x, zero_tol: float = ZERO_TOL):
    """Number of entries with ``|x_i| > zero_tol``; row-wise for 2-d input."""
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    a = np.abs(np.asarray(x, dtype=float))
    if a.ndim <= 1:
        return int(np.count_nonzero(a > zero_tol))
    return np.count_nonzero(a > zero_tol, axis=-1)


def sparsity_probability(X: RandomVector, d: int, mu: str = "P", zero_tol: float = ZERO_TOL) -> float:
    """Probability that at most ``d`` coordinates of ``X`` are nonzero."""
    counts = l0_count(X.values, zero_tol)
    return float(X.space.weights(mu)[counts <= d].sum())


@dataclass(frozen=True)
class SparsityProfile:
    d: int
    epsilon: float
    D: int

    def __post_init__(self):
        if not 0 <= self.d <= self.D:
            raise InvariantError(f"need 0 <= d <= D, got d={self.d}, D={self.D}")
        if not 0 <= self.epsilon <= 1:
            raise InvariantError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    def contains(self, X: RandomVector, mu: str = "P", zero_tol: float = ZERO_TOL) -> bool:
        if X.dim != self.D:
            return False
        return sparsity_probability(X, self.d, mu, zero_tol) >= self.epsilon


@dataclass(frozen=True)
class SparseDemoRow:
    radius: float
    d: int
    before: float
    after: float


def sparse_ce_demo(X: RandomVector, radius: float, d: int, partition=None, mu: str = "P",
                   zero_tol: float = ZERO_TOL):
    """Sparsity probability of ``X`` and of its l1-ball-relative conditional
    expectation, both at level ``d``.

    ``X`` must be measurable for ``partition`` and ``d < D``.  Returns
    ``(before, after, projected)``.
    """
    labels = X.space.partition if partition is None else check_partition(partition, X.n)
    if not d < X.dim:
        raise InvariantError(f"sparsity level d={d} must be below D={X.dim}")
    if not is_measurable(X, labels):
        raise InvariantError("sparse demo needs a G-measurable input")
    Z = phi_relative_cond_exp(X, L1Ball(radius), labels, mu)
    before = sparsity_probability(X, d, mu, zero_tol)
    after = sparsity_probability(Z, d, mu, zero_tol)
    return before, after, Z


def threshold_fixture():
    """Three scenarios in the plane, discrete information, l1 radius 2, d = 1.

    Scenario 0 is already 1-sparse.  Scenario 1, ``(3, 1)``, is thresholded
    onto the axis ``(2, 0)``; scenario 2, ``(1.5, 1.5)``, keeps both
    coordinates.  Sparsity goes from 0.5 to 0.8, a gain of scenario 1's weight.
    """
    space = ScenarioSpace([0.5, 0.3, 0.2], None, [0, 1, 2])
    X = RandomVector(space, [[0.0, 1.0], [3.0, 1.0], [1.5, 1.5]])
    return X, 2.0, 1, 0.3


def nonconvexity_witness(D: int, d: int, n: int = 1):
    """Two ``d``-sparse vectors whose sum has ``min(2d, D)`` nonzeros.

    ``X^A`` is one on the first ``d`` coordinates and ``X^B`` on the last
    ``d``; for ``d < D`` their sum is not ``d``-sparse anywhere.
    """
    if not 1 <= d < D:
        raise InvariantError("need 1 <= d < D")
    space = ScenarioSpace.uniform(n)
    a = np.zeros((n, D))
    b = np.zeros((n, D))
    a[:, :d] = 1.0
    b[:, D - d:] = 1.0
    return RandomVector(space, a), RandomVector(space, b)


def write_sparsity_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["radius", "d", "before", "after"])
        for r in rows:
            w.writerow([repr(float(r.radius)), int(r.d), repr(float(r.before)), repr(float(r.after))])
