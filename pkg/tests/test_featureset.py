import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_vector
from rcond.core import RandomVector, ScenarioSpace, cond_expectation, inner, l2_norm
from rcond.errors import ConvergenceError, InvariantError
from rcond.featureset import (
    FullSpace,
    L1Ball,
    VarianceBall,
    dykstra_project,
    phi_relative_cond_exp,
    project_l1_ball,
    project_variance_ball,
)


def test_l1_examples():
    s = ScenarioSpace.uniform(2)
    X = RandomVector(s, [[3.0, 1.0], [0.5, -0.25]])
    P = project_l1_ball(X, 2.0)
    assert np.allclose(P.values, [[2.0, 0.0], [0.5, -0.25]])


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_radius_must_be_positive(r):
    with pytest.raises(InvariantError):
        L1Ball(r)
    with pytest.raises(InvariantError):
        VarianceBall(r)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10_000), D=st.integers(1, 5), r=st.floats(0.05, 4.0))
def test_l1_projection_variational_inequality(seed, D, r):
    rng = np.random.default_rng(seed)
    X = make_vector(rng, 6, dim=D, scale=2.0)
    P = project_l1_ball(X, r)
    assert np.all(np.abs(P.values).sum(1) <= r * (1 + 1e-12))
    assert np.allclose(project_l1_ball(P, r).values, P.values)
    # <x - p, y - p> <= 0 for every y in the ball
    for _ in range(20):
        y = rng.normal(size=(6, D))
        y *= (r * rng.uniform(size=(6, 1))) / np.abs(y).sum(1, keepdims=True)
        lhs = np.einsum("ij,ij->i", X.values - P.values, y - P.values)
        assert np.all(lhs <= 1e-10)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), r=st.floats(0.05, 3.0))
def test_variance_ball_projection(seed, r):
    X = make_vector(np.random.default_rng(seed), 10, dim=2, scale=2.0)
    P = project_variance_ball(X, r)
    assert l2_norm(P) <= r * (1 + 1e-12)
    if l2_norm(X) <= r:
        assert P is X
    else:
        assert l2_norm(P) == pytest.approx(r)


def test_full_space_dykstra_is_conditional_expectation():
    X = make_vector(np.random.default_rng(0), 20, dim=2, cells=4)
    Z, state = dykstra_project(X, FullSpace(), return_state=True)
    assert np.allclose(Z.values, cond_expectation(X).values, atol=1e-14)
    assert state.iteration <= 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), cells=st.integers(1, 4), r=st.floats(0.1, 2.0))
def test_dykstra_matches_composed_projections(seed, cells, r):
    # both balls commute with cell averaging, so the projection onto the
    # intersection is the ball projection of the conditional expectation
    rng = np.random.default_rng(seed)
    X = make_vector(rng, 16, dim=2, cells=cells, scale=1.5)
    E = cond_expectation(X)
    for phi, direct in ((VarianceBall(r), project_variance_ball(E, r)), (L1Ball(r), project_l1_ball(E, r))):
        Z = dykstra_project(X, phi, tol=1e-12)
        assert np.allclose(Z.values, direct.values, atol=1e-9)


def test_dykstra_optimality_against_probes():
    rng = np.random.default_rng(1)
    X = make_vector(rng, 16, dim=2, cells=3, scale=2.0)
    phi = L1Ball(0.7)
    Z = phi_relative_cond_exp(X, phi, tol=1e-12)
    d = l2_norm(X - Z)
    for _ in range(500):
        Y = cond_expectation(RandomVector(X.space, rng.normal(size=(16, 2))))
        Y = project_l1_ball(Y, 0.7)
        assert d <= l2_norm(X - Y) + 1e-9
        assert inner(X - Z, Y - Z) <= 1e-9


def test_dykstra_iteration_cap():
    X = make_vector(np.random.default_rng(2), 16, dim=2, cells=3, scale=2.0)
    with pytest.raises(ConvergenceError) as info:
        dykstra_project(X, L1Ball(0.3), tol=1e-15, max_iter=1)
    assert info.value.residual > 0
