"""Brute-force test oracles: golden-section search and cell-constant grids.

The grid oracle parameterizes a ``G``-measurable ``Z`` by one value per cell
and minimizes the R-conditioning objective over a dense grid, using only
per-cell moment sums of ``X``.  It shares no code path with the splitting
solver beyond the problem definition itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import RandomVector, check_partition
from .errors import CapabilityError, ConfigurationError
from .featureset import FullSpace, L1Ball, VarianceBall
from .risk import Quadratic, QuadraticLoss

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
MAX_GRID_DIMS = 4


def golden_section(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    if b < a:
        a, b = b, a
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class GridSpec:
    """Grid sizing. ``points=None`` picks 2001 / 61 / 41 per dimension for
    2 / 3 / 4 total dimensions; ``pad`` widens ``[min X, max X]``."""

    points: int = None
    pad: float = 1.0
    zoom_points: int = 41
    zoom_rounds: int = 40
    polish: bool = True


class _CellMoments:
    """Weighted moment sums of one cell, enough to evaluate
    ``sum w |x - z|^2`` and ``sum w |x - z|^4`` for any constant ``z``."""

    def __init__(self, x, w):
        a = np.einsum("ij,ij->i", x, x)
        self.s0 = w.sum()
        self.m1 = w @ x
        self.sa = w @ a
        self.saa = w @ (a * a)
        self.m2 = (x * w[:, None]).T @ x
        self.ax = (w * a) @ x

    def sums(self, z):
        # z: (G, D) candidate values
        s = np.einsum("ij,ij->i", z, z)
        zm = z @ self.m1
        A = self.s0 * s - 2.0 * zm + self.sa
        quad = np.einsum("ij,jk,ik->i", z, self.m2, z)
        B = (self.saa + 4.0 * quad + self.s0 * s * s - 4.0 * (z @ self.ax)
             + 2.0 * s * self.sa - 4.0 * s * zm)
        return A, B


def _check_supported(perspective):
    if not isinstance(perspective.rho, Quadratic) or not isinstance(perspective.utility, QuadraticLoss):
        raise CapabilityError("grid oracle supports the quadratic risk / quadratic loss pair only")
    if not isinstance(perspective.phi, (FullSpace, VarianceBall, L1Ball)):
        raise CapabilityError(f"grid oracle cannot handle feature set {perspective.phi!r}")


class _Problem:
    def __init__(self, X, perspective):
        _check_supported(perspective)
        self.X = X
        self.p = perspective
        self.labels = perspective.labels(X)
        self.C = int(self.labels.max()) + 1
        self.D = X.dim
        if self.C * self.D > MAX_GRID_DIMS:
            raise ConfigurationError(
                f"grid oracle dimension cap: cells x D = {self.C * self.D} > {MAX_GRID_DIMS}"
            )
        wc = X.space.weights(perspective.conditioning_measure)
        wb = X.space.weights(perspective.base_measure)
        self.mc, self.mb, self.pc = [], [], []
        for k in range(self.C):
            m = self.labels == k
            self.mc.append(_CellMoments(X.values[m], wc[m]))
            self.mb.append(_CellMoments(X.values[m], wb[m]))
            self.pc.append(wc[m].sum())

    def evaluate(self, axes):
        """Objective on the product grid of per-cell candidate arrays
        ``axes[k]`` of shape ``(G_k, D)``; returns an array of shape
        ``(G_0, ..., G_{C-1})`` with ``inf`` where infeasible."""
        lam = self.p.lam
        shape_of = lambda k: tuple(-1 if j == k else 1 for j in range(self.C))
        Ac = Ab = Bb = 0.0
        for k, z in enumerate(axes):
            a_c, _ = self.mc[k].sums(z)
            a_b, b_b = self.mb[k].sums(z)
            Ac = Ac + a_c.reshape(shape_of(k))
            Ab = Ab + a_b.reshape(shape_of(k))
            Bb = Bb + b_b.reshape(shape_of(k))
        if lam == 0:
            obj = Ac + 0.0 * Ab
        else:
            obj = (1 - lam) * Ac + lam * (Bb - Ab * Ab + Ab - 0.5)
        return np.where(self._feasible(axes), obj, np.inf)

    def _feasible(self, axes):
        phi = self.p.phi
        shape_of = lambda k: tuple(-1 if j == k else 1 for j in range(self.C))
        if isinstance(phi, FullSpace):
            return True
        if isinstance(phi, VarianceBall):
            tot = 0.0
            for k, z in enumerate(axes):
                tot = tot + (self.pc[k] * np.einsum("ij,ij->i", z, z)).reshape(shape_of(k))
            return tot <= phi.radius ** 2 * (1 + 1e-12)
        ok = True
        for k, z in enumerate(axes):
            ok = ok & (np.abs(z).sum(axis=1) <= phi.radius * (1 + 1e-12)).reshape(shape_of(k))
        return ok

    def point_value(self, theta):
        axes = [theta[k * self.D:(k + 1) * self.D][None, :] for k in range(self.C)]
        return float(np.asarray(self.evaluate(axes)).ravel()[0])


def _cell_axes(lo, hi, D, g):
    # all grid points of one cell's D-dimensional box, as a (g^D, D) array
    ticks = [np.linspace(lo[j], hi[j], g) for j in range(D)]
    return np.array(list(itertools.product(*ticks))) if D > 1 else ticks[0][:, None]


def _grid_argmin(prob, lo, hi, g):
    """Best point of the product grid over the box ``[lo, hi]`` (length ``C * D``)."""
    D = prob.D
    axes = [_cell_axes(lo[k * D:(k + 1) * D], hi[k * D:(k + 1) * D], D, g) for k in range(prob.C)]
    vals = prob.evaluate(axes)
    vals = np.broadcast_to(vals, tuple(len(a) for a in axes))
    idx = int(np.argmin(vals))  # first index wins ties
    best = float(vals.ravel()[idx])
    cell_idx = np.unravel_index(idx, vals.shape)
    theta = np.concatenate([axes[k][cell_idx[k]] for k in range(prob.C)])
    return theta, best


@dataclass
class OracleResult:
    Z: RandomVector
    objective: float
    theta: np.ndarray


def brute_force_oracle(X: RandomVector, perspective, grid: GridSpec = GridSpec()) -> OracleResult:
    """Minimize the R-conditioning objective over cell-constant ``Z`` by brute force.

    A dense grid over ``[min X - pad, max X + pad]`` per coordinate is
    followed by repeated zooming around the incumbent and a cyclic
    golden-section polish of each coordinate.
    """
    prob = _Problem(X, perspective)
    n_dims = prob.C * prob.D
    g = grid.points or {1: 2001, 2: 2001, 3: 61, 4: 41}[n_dims]
    lo0 = np.tile(X.values.min(axis=0) - grid.pad, prob.C)
    hi0 = np.tile(X.values.max(axis=0) + grid.pad, prob.C)
    theta, best = _grid_argmin(prob, lo0, hi0, g)
    if not np.isfinite(best):
        raise ConfigurationError("grid oracle found no feasible grid point")

    h = (hi0 - lo0) / (g - 1)
    zg = grid.zoom_points
    for _ in range(grid.zoom_rounds):
        t, v = _grid_argmin(prob, theta - 2 * h, theta + 2 * h, zg)
        if v < best:
            theta, best = t, v
        h = 4 * h / (zg - 1)
        if np.all(h < 1e-13):
            break

    if grid.polish:
        for _ in range(5):
            improved = False
            for j in range(n_dims):
                def f(t, j=j):
                    th = theta.copy()
                    th[j] = t
                    return prob.point_value(th)
                width = max(1e-6, 1e3 * float(h.max()))
                t, v = golden_section(f, theta[j] - width, theta[j] + width, tol=1e-14)
                if v < best:
                    theta = theta.copy()
                    theta[j] = t
                    best, improved = v, True
            if not improved:
                break

    cells = theta.reshape(prob.C, prob.D)
    Z = RandomVector._wrap(X.space, cells[prob.labels].copy())
    return OracleResult(Z, best, theta)
