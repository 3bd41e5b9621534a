import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_vector
from rcond.core import RandomVector, ScenarioSpace, cond_expectation, l2_norm
from rcond.errors import ConfigurationError
from rcond.featureset import L1Ball, VarianceBall, project_variance_ball
from rcond.oracles import brute_force_oracle, golden_section
from rcond.solver import (
    RiskPerspective,
    feasibility,
    fbs_solve,
    lambda_from_tilde,
    lambda_sweep,
    objective,
    reparameterize,
    sublinear_limit_solve,
    write_trace_csv,
)
from rcond.splitting import SolverConfig


def test_reparameterize_examples():
    assert reparameterize(0.0) == 0.0
    assert reparameterize(0.5) == 2.0
    for n in range(1, 20):
        assert reparameterize(n / (2 + n)) == pytest.approx(n, rel=1e-14)


@given(lam=st.floats(0.0, 0.999))
def test_reparameterize_round_trip(lam):
    assert abs(lambda_from_tilde(reparameterize(lam)) - lam) <= 1e-14


@pytest.mark.parametrize("lam", [1.0, -0.1, 1.5])
def test_lambda_domain(lam):
    with pytest.raises(ConfigurationError):
        reparameterize(lam)
    with pytest.raises(ConfigurationError):
        RiskPerspective(lam=lam)
    with pytest.raises(ConfigurationError):
        lambda_from_tilde(-abs(lam) - 0.1)


def test_objective_at_identity():
    X = make_vector(np.random.default_rng(0), 10)
    for lam in (0.0, 0.3, 0.8):
        assert objective(X, X, RiskPerspective(lam=lam)) == pytest.approx(lam * -0.5)


def test_lambda_zero_is_conditional_expectation():
    X = make_vector(np.random.default_rng(1), 30, dim=2, cells=4)
    res = fbs_solve(X, RiskPerspective(lam=0.0))
    assert res.iterations <= 2
    assert np.allclose(res.Z_star.values, cond_expectation(X).values)
    assert res.M_lambda == float("inf")


def test_scalar_closed_form_and_golden_section():
    # with trivial information the objective is a convex quadratic in the constant
    rng = np.random.default_rng(2)
    X = make_vector(rng, 64)
    lam = 0.5
    res = fbs_solve(X, RiskPerspective(lam=lam))
    p = RiskPerspective(lam=lam)
    f = lambda c: objective(X, RandomVector.constant(X.space, c), p)
    c_gs, _ = golden_section(f, X.scalar.min() - 1, X.scalar.max() + 1)
    w, x = X.space.weights_p, X.scalar
    m = w @ x
    V = w @ (x - m) ** 2
    C = w @ (x * x * (x - m))
    c_cf = (m + 2 * lam * C) / (1 + 4 * lam * V)
    assert res.Z_star.values[0, 0] == pytest.approx(c_gs, abs=1e-5)
    assert res.Z_star.values[0, 0] == pytest.approx(c_cf, abs=1e-8)


@pytest.mark.parametrize("lam", [0.2, 0.6, 0.95])
def test_two_cell_oracle(lam):
    X = make_vector(np.random.default_rng(int(lam * 100)), 40, cells=2)
    p = RiskPerspective(lam=lam)
    assert fbs_solve(X, p).objective == pytest.approx(brute_force_oracle(X, p).objective, abs=1e-4)


def test_mixed_measures_against_oracle():
    X = make_vector(np.random.default_rng(3), 30, cells=2)
    for base, cond in (("P", "Q"), ("Q", "P")):
        p = RiskPerspective(lam=0.6, base_measure=base, conditioning_measure=cond)
        assert fbs_solve(X, p).objective == pytest.approx(brute_force_oracle(X, p).objective, abs=1e-6)


@pytest.mark.parametrize("phi", [VarianceBall(0.3), L1Ball(0.4)])
def test_constrained_against_oracle(phi):
    X = make_vector(np.random.default_rng(4), 24, cells=2, scale=1.5)
    p = RiskPerspective(phi=phi, lam=0.5)
    res = fbs_solve(X, p)
    assert all(feasibility(res.Z_star, p))
    assert res.objective <= brute_force_oracle(X, p).objective + 1e-6


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.01, 0.95), cells=st.integers(1, 4))
def test_solution_properties(seed, lam, cells):
    rng = np.random.default_rng(seed)
    X = make_vector(rng, 20, cells=cells)
    p = RiskPerspective(lam=lam)
    res = fbs_solve(X, p)
    assert all(feasibility(res.Z_star, p))
    vals = [t[1] for t in res.trace]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    assert 2 * lam * res.M_lambda / (1 - lam) == pytest.approx(res.risk, rel=1e-12, abs=1e-15)
    for _ in range(50):
        Y = cond_expectation(RandomVector(X.space, res.Z_star.values + rng.normal(scale=0.3, size=(20, 1))))
        assert res.objective <= objective(X, Y, p) + 1e-9


def test_probe_oracle_with_variance_ball():
    rng = np.random.default_rng(5)
    X = make_vector(rng, 20, cells=3, scale=2.0)
    p = RiskPerspective(phi=VarianceBall(0.5), lam=0.4)
    res = fbs_solve(X, p)
    for _ in range(1000):
        Y = cond_expectation(RandomVector(X.space, rng.normal(size=(20, 1))))
        Y = project_variance_ball(Y, 0.5)
        assert res.objective <= objective(X, Y, p) + 1e-9


def test_geometric_schedule_reaches_same_point():
    X = make_vector(np.random.default_rng(6), 30, cells=2)
    p = RiskPerspective(lam=0.5)
    a = fbs_solve(X, p)
    b = fbs_solve(X, p, SolverConfig(step_schedule="geometric", ratio=0.7))
    assert np.allclose(a.Z_star.values, b.Z_star.values, atol=1e-7)


def test_sweep_rows_and_monotone_risk():
    X = make_vector(np.random.default_rng(7), 40, cells=2)
    lams = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9]
    out = lambda_sweep(X, RiskPerspective(), lams)
    assert [r.lam for r in out] == lams
    assert np.allclose(out[0].Z_star.values, cond_expectation(X).values)
    risks = [r.risk for r in out]
    assert all(b <= a + 1e-7 for a, b in zip(risks, risks[1:]))
    assert set(out[1].row()) >= {"lambda", "lambda_tilde", "objective", "M_lambda", "risk"}


def test_sweep_rejects_unsorted():
    X = make_vector(np.random.default_rng(8), 5)
    with pytest.raises(ConfigurationError):
        lambda_sweep(X, RiskPerspective(), [0.5, 0.1])


def test_sweep_keeps_going_after_failure():
    X = make_vector(np.random.default_rng(9), 20, cells=2)
    out = lambda_sweep(X, RiskPerspective(), [0.3, 0.6], SolverConfig(max_iter=1, tol=1e-15))
    assert [r.converged for r in out] == [False, False]


def test_sublinear_single_step():
    X = make_vector(np.random.default_rng(10), 6)
    out = sublinear_limit_solve(X, RiskPerspective(), 1)
    assert len(out.trajectory) == 1
    assert out.final.lam == pytest.approx(1 / 3)


def test_sweep_end_matches_grid_minimum_of_risk():
    space = ScenarioSpace([0.4, 0.6])
    X = RandomVector(space, [1.0, -0.5])
    out = sublinear_limit_solve(X, RiskPerspective(), 60)
    cr = RiskPerspective().composite
    grid = np.linspace(-1.5, 2.0, 3501)
    best = min(cr.evaluate(X - c) for c in grid)
    assert out.final.risk == pytest.approx(best, abs=1e-3)


def test_trace_csv(tmp_path):
    X = make_vector(np.random.default_rng(11), 10)
    res = fbs_solve(X, RiskPerspective(lam=0.5))
    write_trace_csv(res, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iteration,objective,residual"
    assert len(lines) == len(res.trace) + 1
    assert float(lines[-1].split(",")[1]) == pytest.approx(res.objective, abs=1e-12)
