"""Self-checks run by the ``validate`` command.

Each suite compares a library routine against an independent oracle or an
algebraic identity on the shipped fixtures plus a few seeded random
instances, and yields one :class:`Check` per comparison.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import RandomVector, ScenarioSpace, cond_expectation, read_csv
from .featureset import L1Ball, VarianceBall, dykstra_project
from .oracles import brute_force_oracle
from .risk import (
    CompositeRisk,
    Quadratic,
    QuadraticLoss,
    moreau_extension,
    rho2_evaluate,
    rho2_gradient,
)
from .solver import RiskPerspective, fbs_solve, objective
from .sparsity import threshold_fixture, sparse_ce_demo

FIXTURES = ("oracle_trivial.csv", "oracle_two_cell.csv", "dykstra_plane.csv")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    error: float
    tolerance: float


def load_fixture(name: str) -> RandomVector:
    with resources.as_file(resources.files("rcond") / "fixtures" / name) as path:
        return read_csv(path)


def fd_gradient(f, X: RandomVector, mu: str = "P", eps: float = 1e-6) -> RandomVector:
    """Central-difference ``L2(mu)`` gradient of a scalar functional ``f``.

    Partial derivatives in each scenario value are divided by that
    scenario's weight to give the Riesz representer.
    """
    w = X.space.weights(mu)
    v = X.values
    out = np.empty_like(v)
    for i in range(v.shape[0]):
        for j in range(v.shape[1]):
            up = v.copy()
            dn = v.copy()
            up[i, j] += eps
            dn[i, j] -= eps
            out[i, j] = (f(RandomVector._wrap(X.space, up)) - f(RandomVector._wrap(X.space, dn))) / (2 * eps)
    return RandomVector._wrap(X.space, out / w[:, None])


def rel_error(a: RandomVector, b: RandomVector) -> float:
    num = np.linalg.norm(a.values - b.values)
    return float(num / max(np.linalg.norm(b.values), 1e-300))


def random_ensemble(rng, n: int, dim: int = 1, cells: int = 1, scale: float = 1.0) -> RandomVector:
    labels = np.concatenate([np.arange(cells), rng.integers(0, cells, n - cells)])
    space = ScenarioSpace(rng.uniform(0.2, 1.0, n), rng.uniform(0.2, 1.0, n), labels)
    return RandomVector(space, rng.normal(0.0, scale, (n, dim)))


def oracle_suite(rng):
    for name in FIXTURES[:2]:
        X = load_fixture(name)
        for lam in (0.0, 0.25, 0.5, 0.9):
            p = RiskPerspective(lam=lam)
            err = abs(fbs_solve(X, p).objective - brute_force_oracle(X, p).objective)
            yield Check("oracle", f"{name}:lambda={lam}", err <= 1e-4, err, 1e-4)


def gradient_suite(rng, n_points: int = 5):
    cr = CompositeRisk(Quadratic(), QuadraticLoss(), "P")
    for k in range(n_points):
        Z = random_ensemble(rng, 12)
        err = rel_error(rho2_gradient(Z), fd_gradient(rho2_evaluate, Z))
        yield Check("gradient", f"rho2#{k}", err <= 1e-5, err, 1e-5)
        Y = random_ensemble(rng, 12, dim=2, scale=0.7)
        err = rel_error(cr.gradient(Y), fd_gradient(cr.evaluate, Y))
        yield Check("gradient", f"composite#{k}", err <= 1e-5, err, 1e-5)


def axioms_suite(rng, n: int = 200):
    worst_cash = worst_convex = worst_mono = 0.0
    for _ in range(n):
        Z = random_ensemble(rng, 16)
        W = RandomVector(Z.space, rng.normal(size=16))
        k = float(rng.normal(scale=3.0))
        worst_cash = max(worst_cash, abs(rho2_evaluate(Z + k) - (rho2_evaluate(Z) - k)))
        a = float(rng.uniform())
        gap = rho2_evaluate(Z * a + W * (1 - a)) - (a * rho2_evaluate(Z) + (1 - a) * rho2_evaluate(W))
        worst_convex = max(worst_convex, gap)
        # the quadratic measure is decreasing on {Z - E Z <= 1/2}
        Zc = Z - float(Z.space.weights_p @ Z.scalar)
        Zc = Zc * (0.4 / float(np.max(np.abs(Zc.scalar))))
        H = RandomVector(Z.space, rng.uniform(0, 1e-3, 16))
        worst_mono = max(worst_mono, rho2_evaluate(Zc + H) - rho2_evaluate(Zc))
    yield Check("axioms", "cash_invariance", worst_cash <= 1e-10, worst_cash, 1e-10)
    yield Check("axioms", "convexity", worst_convex <= 1e-10, max(worst_convex, 0.0), 1e-10)
    yield Check("axioms", "antitone_near_mean", worst_mono <= 1e-10, max(worst_mono, 0.0), 1e-10)


def projection_suite(rng):
    X = load_fixture(FIXTURES[2])
    for phi in (VarianceBall(0.8), L1Ball(0.9)):
        Z = dykstra_project(X, phi, tol=1e-12)
        ok = phi.contains(Z, "P", 1e-8)
        yield Check("projection", f"{phi!r}:feasible", ok, 0.0 if ok else 1.0, 1e-8)
        p = RiskPerspective(phi=phi, lam=0.0)
        err = objective(X, Z, p) - brute_force_oracle(X, p).objective
        yield Check("projection", f"{phi!r}:optimal", err <= 1e-4, max(err, 0.0), 1e-4)


def sparsity_suite(rng):
    X, radius, d, gain = threshold_fixture()
    before, after, _ = sparse_ce_demo(X, radius, d)
    short = gain - (after - before)
    yield Check("sparsity", "threshold_fixture_gain", short <= 1e-12, max(short, 0.0), 1e-12)


def moreau_suite(rng, n: int = 3):
    rho = Quadratic()
    for k in range(n):
        X = random_ensemble(rng, 10)
        err = abs(moreau_extension(rho, 1e-4, X).value - rho2_evaluate(X))
        yield Check("moreau", f"small_eta#{k}", err <= 1e-2, err, 1e-2)


def classical_suite(rng):
    X = load_fixture(FIXTURES[1])
    res = fbs_solve(X, RiskPerspective(lam=0.0))
    err = float(np.max(np.abs(res.Z_star.values - cond_expectation(X).values)))
    yield Check("classical", "lambda_zero", err <= 1e-12, err, 1e-12)
    res = fbs_solve(X, RiskPerspective(lam=0.5))
    vals = [t[1] for t in res.trace]
    worst = max([b - a for a, b in zip(vals, vals[1:])] + [0.0])
    yield Check("classical", "descent", worst <= 1e-9, worst, 1e-9)


SUITES = (oracle_suite, gradient_suite, axioms_suite, projection_suite,
          sparsity_suite, moreau_suite, classical_suite)


def run_validation(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    checks = []
    for suite in SUITES:
        checks.extend(suite(rng))
    return checks


def write_validation_csv(checks, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["suite", "check", "passed", "error", "tolerance"])
        for c in checks:
            w.writerow([c.suite, c.name, int(c.passed), repr(float(c.error)), repr(float(c.tolerance))])
