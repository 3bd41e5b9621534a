import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcond.core import RandomVector, ScenarioSpace
from rcond.errors import InvariantError
from rcond.featureset import project_l1_ball
from rcond.sparsity import (
    SparsityProfile,
    l0_count,
    threshold_fixture,
    nonconvexity_witness,
    sparse_ce_demo,
    sparsity_probability,
    write_sparsity_csv,
    SparseDemoRow,
)


def test_l0_examples():
    assert l0_count(np.zeros(4)) == 0
    assert l0_count([1.0, 0.0, 2.0]) == 2
    p = project_l1_ball(RandomVector(ScenarioSpace.uniform(1), [[3.0, 1.0]]), 2.0)
    assert l0_count(p.values[0]) == 1
    assert list(l0_count(np.array([[0, 1e-13], [1, 1]]))) == [0, 2]


@given(k=st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-3))
def test_l0_scale_invariance(k):
    x = np.array([0.0, 1.5, -2.0, 0.0, 0.3])
    assert l0_count(k * x) == l0_count(x)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), D=st.integers(1, 5))
def test_probability_monotone_in_d(seed, D):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(30, D)) * (rng.uniform(size=(30, D)) < 0.5)
    X = RandomVector(ScenarioSpace(rng.uniform(0.1, 1, 30)), v)
    probs = [sparsity_probability(X, d) for d in range(D + 1)]
    assert all(b >= a for a, b in zip(probs, probs[1:]))
    assert probs[-1] == pytest.approx(1.0)


def test_never_sparse_is_zero():
    rng = np.random.default_rng(0)
    X = RandomVector(ScenarioSpace.uniform(50), rng.uniform(0.5, 1.0, (50, 4)))
    assert sparsity_probability(X, 3) == 0.0


def test_profile():
    X, *_ = threshold_fixture()
    assert SparsityProfile(1, 0.5, 2).contains(X)
    assert not SparsityProfile(1, 0.6, 2).contains(X)
    with pytest.raises(InvariantError):
        SparsityProfile(3, 0.5, 2)
    with pytest.raises(InvariantError):
        SparsityProfile(1, 1.5, 2)


def test_threshold_fixture_numbers():
    X, radius, d, gain = threshold_fixture()
    before, after, Z = sparse_ce_demo(X, radius, d)
    assert before == pytest.approx(0.5)
    assert after == pytest.approx(0.8)
    assert np.allclose(Z.values, [[0, 1], [2, 0], [1, 1]])


def test_inside_ball_is_unchanged():
    X, _, d, _ = threshold_fixture()
    before, after, Z = sparse_ce_demo(X, 10.0, d)
    assert before == after
    assert np.array_equal(Z.values, X.values)


def test_demo_preconditions():
    s = ScenarioSpace.uniform(2)
    X = RandomVector(s, [[1.0, 0.0], [0.0, 1.0]])  # not measurable for the trivial partition
    with pytest.raises(InvariantError):
        sparse_ce_demo(X, 1.0, 1)
    with pytest.raises(InvariantError):
        sparse_ce_demo(X, 1.0, 2, partition=[0, 1])


@pytest.mark.parametrize("D,d", [(2, 1), (5, 2), (5, 4), (3, 1)])
def test_nonconvexity_witness(D, d):
    A, B = nonconvexity_witness(D, d, n=3)
    assert sparsity_probability(A, d) == 1.0
    assert sparsity_probability(B, d) == 1.0
    assert sparsity_probability(A + B, d) == 0.0


def test_csv(tmp_path):
    write_sparsity_csv([SparseDemoRow(2.0, 1, 0.5, 0.8)], tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines() == ["radius,d,before,after", "2.0,1,0.5,0.8"]
