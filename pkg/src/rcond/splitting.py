"""Relaxed proximal forward-backward iteration on random vectors.

The engine minimizes ``h(Z) + i_C(Z)`` where ``h`` is smooth and ``C`` is a
closed convex set known only through its metric projection.  Each step is

    Z <- Z + alpha_n * (proj_C(Z - gamma_n * (grad h(Z) + B_n)) + A_n - Z)

with optional error sequences ``A_n, B_n``.  Both the R-conditioning solver
and the Moreau-envelope extension of a risk measure are built on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import RandomVector, l2_norm
from .errors import ConfigurationError, ConvergenceError

STEP_SCHEDULES = ("constant", "geometric")


@dataclass(frozen=True)
class SolverConfig:
    """Meta-parameters of the forward-backward iteration.

    ``gamma0=None`` means "estimate": the step is set to ``beta``, where
    ``beta = 1 / (2 * L)`` and ``L`` is the largest sampled difference
    quotient of the gradient. The geometric schedule uses
    ``gamma_n = gamma0 / ratio**n``.
    """

    gamma0: Optional[float] = None
    step_schedule: str = "constant"
    ratio: float = 0.7
    alpha: float = 1.0
    max_iter: int = 10_000
    tol: float = 1e-10
    backtrack: bool = True
    error_sequences: Optional[Callable] = None
    dykstra_tol: float = 1e-12
    dykstra_max_iter: int = 10_000
    beta_samples: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.gamma0 is not None and not self.gamma0 > 0:
            raise ConfigurationError("gamma0 must be positive")
        if self.step_schedule not in STEP_SCHEDULES:
            raise ConfigurationError(
                f"step_schedule must be one of {STEP_SCHEDULES}, got {self.step_schedule!r}"
            )
        if not self.ratio > 0:
            raise ConfigurationError("geometric ratio must be positive")
        if not 0 < self.alpha <= 1:
            raise ConfigurationError("alpha must lie in (0, 1]")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")

    def step(self, n: int, gamma0: float) -> float:
        if self.step_schedule == "constant":
            return gamma0
        return gamma0 / self.ratio ** n


def geometric_errors(scale: float, rate: float = 0.5):
    """Deterministic, square-summable error sequences ``A_n = B_n = scale * rate**n``.

    The perturbations are constants, hence measurable for every partition.
    """
    if not 0 <= rate < 1:
        raise ConfigurationError("rate must lie in [0, 1) for summability")

    def errors(n, z):
        e = RandomVector._wrap(z.space, np.full(z.values.shape, scale * rate ** n))
        return e, e

    return errors


def estimate_beta(grad, project, center: RandomVector, radius: float, mu: str,
                  n_pairs: int = 100, seed: int = 0) -> float:
    """``1 / (2 * L)`` with ``L`` the max sampled difference quotient of ``grad``.

    Pairs are drawn from the feasible directions around ``center``: random
    perturbations pushed through ``project``. Gradient differences are
    projected too, since only feasible directions enter the sufficient-decrease bound.
    """
    rng = np.random.default_rng(seed)
    space = center.space
    shape = center.values.shape
    radius = max(radius, 1e-8)
    L = 0.0
    for _ in range(n_pairs):
        a = project(RandomVector._wrap(space, rng.standard_normal(shape)))
        b = project(RandomVector._wrap(space, rng.standard_normal(shape)))
        na, nb = l2_norm(a, mu), l2_norm(b, mu)
        if na == 0 or nb == 0:
            continue
        z1 = center + a * (radius * rng.uniform() / na)
        z2 = center + b * (radius * rng.uniform() / nb)
        dz = l2_norm(z1 - z2, mu)
        if dz < 1e-14:
            continue
        dg = project(grad(z1) - grad(z2))
        L = max(L, l2_norm(dg, mu) / dz)
    if L == 0.0:
        L = 1.0
    return 1.0 / (2.0 * L)


@dataclass
class FBResult:
    z: RandomVector
    iterations: int
    residual: float
    converged: bool
    trace: list
    gamma0: float


def forward_backward(z0: RandomVector, grad, project, objective, gamma0: float,
                     config: SolverConfig, mu: str = "P") -> FBResult:
    """Run the relaxed forward-backward iteration from ``z0``.

    ``objective`` (the smooth part, evaluated on feasible points) drives the
    trace and, when ``config.backtrack`` is on and no error sequences are
    active, step halving whenever an iterate would increase it.
    Raises :class:`ConvergenceError` if ``config.max_iter`` is reached.
    """
    z = z0
    f_z = objective(z)
    trace = [(0, f_z, float("nan"))]
    errors = config.error_sequences
    backtrack = config.backtrack and errors is None
    base = gamma0
    residual = float("inf")
    for n in range(config.max_iter):
        gamma = config.step(n, base)
        A = B = None
        if errors is not None:
            A, B = errors(n, z)
        g = grad(z)
        if B is not None:
            g = g + B
        while True:
            y = project(z - g * gamma)
            if A is not None:
                y = y + A
            z_new = z + (y - z) * config.alpha if config.alpha != 1.0 else y
            f_new = objective(z_new)
            if not backtrack or f_new <= f_z + 1e-13 * max(1.0, abs(f_z)):
                break
            gamma *= 0.5
            if config.step_schedule == "constant":
                base = gamma
            else:
                base *= 0.5
            if gamma < 1e-300:
                break
        residual = l2_norm(z_new - z, mu)
        z, f_z = z_new, f_new
        trace.append((n + 1, f_z, residual))
        if residual < config.tol:
            return FBResult(z, n + 1, residual, True, trace, gamma0)
    raise ConvergenceError(
        f"forward-backward stopped after {config.max_iter} iterations",
        residual, iterate=z, trace=trace,
    )
