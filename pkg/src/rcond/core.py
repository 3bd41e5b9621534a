"""Finite scenario spaces, random vectors and (conditional) expectations.

A probability space is a finite set of scenarios carrying one or two weight
vectors: the objective measure ``"P"`` and, optionally, a risk-neutral
measure ``"Q"`` on the same scenarios.  Sub-sigma-algebras are partitions of
the scenario set, given as integer cell labels ``0..C-1``.  A random vector is
an ``N x D`` value matrix tied to its space.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, InvariantError

MEASURES = ("P", "Q")
WEIGHT_TOL = 1e-12


def _as_weights(w, name):
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0:
        raise InvariantError(f"{name}: empty weight vector")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvariantError(f"{name}: weights must be finite and strictly positive")
    w = w / w.sum()
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise InvariantError(f"{name}: weights do not sum to one after normalization")
    w.flags.writeable = False
    return w


def check_partition(labels, n_scenarios: int) -> np.ndarray:
    """Validate cell labels and return them as a read-only int array.

    Labels must be one per scenario and form the contiguous set ``0..C-1``
    with no empty cell.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size != n_scenarios:
        raise InvariantError(
            f"partition needs {n_scenarios} labels, got shape {labels.shape}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.mod(labels, 1) == 0):
            raise InvariantError("partition labels must be integers")
        labels = labels.astype(np.int64)
    if labels.min() < 0:
        raise InvariantError("partition labels must be non-negative")
    counts = np.bincount(labels)
    if np.any(counts == 0):
        raise InvariantError("partition labels must be contiguous with no empty cell")
    labels = labels.astype(np.int64, copy=True)
    labels.flags.writeable = False
    return labels


def trivial_partition(n: int) -> np.ndarray:
    """One cell: the trivial sigma-algebra."""
    return check_partition(np.zeros(n, dtype=np.int64), n)


def discrete_partition(n: int) -> np.ndarray:
    """One cell per scenario: the full sigma-algebra."""
    return check_partition(np.arange(n, dtype=np.int64), n)


def n_cells(partition) -> int:
    return int(np.max(partition)) + 1


@dataclass(frozen=True, eq=False)
class ScenarioSpace:
    """Finite weighted sample space.

    Parameters
    ----------
    weights_p : array_like
        Objective-measure weights, strictly positive. Normalized on construction.
    weights_q : array_like, optional
        Risk-neutral weights on the same scenarios.
    partition : array_like of int, optional
        Default sub-sigma-algebra; the trivial partition when omitted.
    """

    weights_p: np.ndarray
    weights_q: Optional[np.ndarray] = None
    partition: Optional[np.ndarray] = None

    def __post_init__(self):
        wp = _as_weights(self.weights_p, "weights_p")
        object.__setattr__(self, "weights_p", wp)
        if self.weights_q is not None:
            wq = _as_weights(self.weights_q, "weights_q")
            if wq.size != wp.size:
                raise InvariantError("weights_p and weights_q differ in length")
            object.__setattr__(self, "weights_q", wq)
        if self.partition is None:
            object.__setattr__(self, "partition", trivial_partition(wp.size))
        else:
            object.__setattr__(self, "partition", check_partition(self.partition, wp.size))

    @classmethod
    def uniform(cls, n: int, partition=None, with_q: bool = True) -> "ScenarioSpace":
        w = np.full(n, 1.0 / n)
        return cls(w, w if with_q else None, partition)

    @property
    def n_scenarios(self) -> int:
        return self.weights_p.size

    def weights(self, mu: str = "P") -> np.ndarray:
        if mu == "P":
            return self.weights_p
        if mu == "Q":
            if self.weights_q is None:
                raise ConfigurationError("measure 'Q' requested but the space carries no Q weights")
            return self.weights_q
        raise ConfigurationError(f"unknown measure tag {mu!r}; expected one of {MEASURES}")

    def with_partition(self, partition) -> "ScenarioSpace":
        return ScenarioSpace(self.weights_p, self.weights_q, partition)


@dataclass(frozen=True, eq=False)
class RandomVector:
    """An ``N x D`` matrix of values over a :class:`ScenarioSpace`."""

    space: ScenarioSpace
    values: np.ndarray = field(repr=False)

    # numpy scalars on the left must defer to our operators
    __array_ufunc__ = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.space.n_scenarios:
            raise InvariantError(
                f"values must be ({self.space.n_scenarios}, D), got {np.shape(self.values)}"
            )
        if not np.all(np.isfinite(v)):
            raise InvariantError("random vector has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def _wrap(cls, space, values):
        # trusted internal constructor: no copy, no finiteness scan
        obj = object.__new__(cls)
        values.flags.writeable = False
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "values", values)
        return obj

    @classmethod
    def constant(cls, space, c, dim: int = 1) -> "RandomVector":
        c = np.broadcast_to(np.asarray(c, dtype=float), (dim,))
        return cls(space, np.tile(c, (space.n_scenarios, 1)))

    @classmethod
    def zeros(cls, space, dim: int = 1) -> "RandomVector":
        return cls(space, np.zeros((space.n_scenarios, dim)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def scalar(self) -> np.ndarray:
        """The value column of a ``D = 1`` vector."""
        if self.dim != 1:
            raise InvariantError(f"expected a scalar random vector, got D={self.dim}")
        return self.values[:, 0]

    def with_values(self, values) -> "RandomVector":
        return RandomVector(self.space, values)

    def _other(self, other):
        if isinstance(other, RandomVector):
            if other.space is not self.space:
                raise InvariantError("random vectors live on different scenario spaces")
            if other.values.shape != self.values.shape:
                raise InvariantError(
                    f"shape mismatch {self.values.shape} vs {other.values.shape}"
                )
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other):
        return RandomVector._wrap(self.space, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVector._wrap(self.space, self.values - self._other(other))

    def __rsub__(self, other):
        return RandomVector._wrap(self.space, self._other(other) - self.values)

    def __neg__(self):
        return RandomVector._wrap(self.space, -self.values)

    def __mul__(self, k):
        if isinstance(k, RandomVector):
            return NotImplemented
        return RandomVector._wrap(self.space, self.values * np.asarray(k, dtype=float))

    __rmul__ = __mul__

    def __truediv__(self, k):
        return RandomVector._wrap(self.space, self.values / float(k))


def expectation(X: RandomVector, mu: str = "P") -> np.ndarray:
    """Weighted average ``sum_i w_i X[i, :]``; a length-``D`` array."""
    w = X.space.weights(mu)
    return w @ X.values


def cell_probabilities(space: ScenarioSpace, partition, mu: str = "P") -> np.ndarray:
    partition = check_partition(partition, space.n_scenarios)
    return np.bincount(partition, weights=space.weights(mu))


def cond_expectation(X: RandomVector, partition=None, mu: str = "P") -> RandomVector:
    """Conditional expectation given the sigma-algebra generated by ``partition``.

    On each cell the result is the ``mu``-weighted average of ``X`` over
    that cell.  ``partition=None`` uses the space's default partition.
    """
    labels = X.space.partition if partition is None else check_partition(partition, X.n)
    return _cell_average(X, labels, mu)


def _cell_average(X: RandomVector, labels: np.ndarray, mu: str) -> RandomVector:
    # labels must already be validated
    space = X.space
    w = space.weights(mu)
    C = int(labels.max()) + 1
    if C == labels.size:
        return X  # every scenario is its own cell
    cell_w = np.bincount(labels, weights=w, minlength=C)
    sums = np.empty((C, X.dim))
    for d in range(X.dim):
        sums[:, d] = np.bincount(labels, weights=w * X.values[:, d], minlength=C)
    means = sums / cell_w[:, None]
    return RandomVector._wrap(space, means[labels])


def is_measurable(X: RandomVector, partition, tol: float = 0.0) -> bool:
    """Whether ``X`` is constant on every cell of ``partition`` (up to ``tol``)."""
    labels = check_partition(partition, X.n)
    C = int(labels.max()) + 1
    spread = 0.0
    for d in range(X.dim):
        hi = np.full(C, -np.inf)
        lo = np.full(C, np.inf)
        np.maximum.at(hi, labels, X.values[:, d])
        np.minimum.at(lo, labels, X.values[:, d])
        spread = max(spread, float(np.max(hi - lo)))
    return spread <= tol


def inner(X: RandomVector, Y: RandomVector, mu: str = "P") -> float:
    """The L2 pairing ``E_mu[<X, Y>]``."""
    y = X._other(Y)
    w = X.space.weights(mu)
    return float(w @ np.einsum("ij,ij->i", X.values, y))


def l2_norm(X: RandomVector, mu: str = "P") -> float:
    w = X.space.weights(mu)
    return float(np.sqrt(w @ np.einsum("ij,ij->i", X.values, X.values)))


# -- CSV fixtures -----------------------------------------------------------

def write_csv(X: RandomVector, path, partition=None) -> None:
    """One row per scenario: ``weight_p, weight_q, cell, value_0 .. value_{D-1}``."""
    space = X.space
    labels = space.partition if partition is None else check_partition(partition, X.n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["weight_p", "weight_q", "cell"] + [f"value_{d}" for d in range(X.dim)])
        for i in range(X.n):
            wq = "" if space.weights_q is None else repr(float(space.weights_q[i]))
            writer.writerow(
                [repr(float(space.weights_p[i])), wq, int(labels[i])]
                + [repr(float(v)) for v in X.values[i]]
            )


def read_csv(path) -> RandomVector:
    """Inverse of :func:`write_csv`; the cell column becomes the space's partition."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["weight_p", "weight_q", "cell"]:
            raise ConfigurationError(f"{path}: unexpected header {header[:3]}")
        rows = [r for r in reader if r]
    if not rows:
        raise ConfigurationError(f"{path}: no scenario rows")
    wp = [float(r[0]) for r in rows]
    has_q = all(r[1] != "" for r in rows)
    if not has_q and any(r[1] != "" for r in rows):
        raise ConfigurationError(f"{path}: weight_q column partially filled")
    wq = [float(r[1]) for r in rows] if has_q else None
    cells = [int(r[2]) for r in rows]
    values = [[float(v) for v in r[3:]] for r in rows]
    space = ScenarioSpace(wp, wq, cells)
    return RandomVector(space, values)
