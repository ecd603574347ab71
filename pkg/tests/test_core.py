"""Error metrics, parameter containers, and numeric reduction utilities."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twomix import (
    DiagonalParams,
    GeneralParams,
    IsotropicParams,
    TruthSpec,
    deterministic_sum,
    location_error_symmetric,
    logsumexp2,
    scale_error,
    wasserstein_general,
)
from twomix.core import deterministic_mean, seed_entropy

finite_floats = st.floats(
    min_value=-1e5, max_value=1e5, allow_nan=False, allow_infinity=False
)
theta_vectors = st.lists(finite_floats, min_size=1, max_size=5).map(np.array)


# ---------------------------------------------------------------------------
# location_error_symmetric


def test_location_error_zero_at_truth():
    assert location_error_symmetric([0.0, 0.0], [0.0, 0.0]) == 0.0


def test_location_error_is_euclidean_norm_when_truth_zero():
    assert location_error_symmetric([0.3, 0.4], [0.0, 0.0]) == pytest.approx(0.5, rel=1e-14)


def test_location_error_sign_symmetry_case():
    assert location_error_symmetric([1.0, 0.0], [-1.0, 0.0]) == 0.0


def test_location_error_dimension_mismatch():
    with pytest.raises(ValueError):
        location_error_symmetric([1.0, 0.0], [1.0])


@given(theta=theta_vectors, truth=theta_vectors)
def test_location_error_even_in_theta(theta, truth):
    if theta.shape != truth.shape:
        truth = np.resize(truth, theta.shape)
    assert location_error_symmetric(theta, truth) == location_error_symmetric(-theta, truth)


# ---------------------------------------------------------------------------
# scale_error


def test_scale_error_examples():
    assert scale_error(1.0, 1.0) == 0.0
    assert scale_error(1.25, 1.0) == 0.25
    assert scale_error(0.5, 1.0) == 0.5


def test_scale_error_rejects_nonpositive_variance():
    with pytest.raises(ValueError):
        scale_error(-1.0, 1.0)
    with pytest.raises(ValueError):
        scale_error(1.0, 0.0)


# ---------------------------------------------------------------------------
# wasserstein_general


def _truth(theta_star, sigma_star2=1.0):
    return TruthSpec(theta_star=np.atleast_1d(np.asarray(theta_star, float)), sigma_star2=sigma_star2)


def test_wasserstein_zero_at_truth():
    p = GeneralParams(theta1=np.zeros(2), theta2=np.zeros(2), sigma2=1.0)
    assert wasserstein_general(p, _truth([0.0, 0.0])) == 0.0


def test_wasserstein_symmetric_pair():
    p = GeneralParams(theta1=[0.2], theta2=[-0.2], sigma2=1.0)
    assert wasserstein_general(p, _truth([0.0])) == pytest.approx(0.2, rel=1e-14)


def test_wasserstein_scale_only():
    p = GeneralParams(theta1=[0.0], theta2=[0.0], sigma2=1.21)
    # both atoms displaced only in the sigma coordinate: |1.1 - 1.0|
    assert wasserstein_general(p, _truth([0.0])) == pytest.approx(0.1, rel=1e-13)


def test_wasserstein_dimension_mismatch():
    p = GeneralParams(theta1=[0.0, 0.0], theta2=[0.0, 0.0], sigma2=1.0)
    with pytest.raises(ValueError):
        wasserstein_general(p, _truth([0.0]))


@given(
    t1=st.lists(finite_floats, min_size=2, max_size=2).map(np.array),
    t2=st.lists(finite_floats, min_size=2, max_size=2).map(np.array),
    s2=st.floats(min_value=1e-3, max_value=1e3),
)
def test_wasserstein_swap_invariant(t1, t2, s2):
    truth = _truth([0.0, 0.0])
    a = wasserstein_general(GeneralParams(theta1=t1, theta2=t2, sigma2=s2), truth)
    b = wasserstein_general(GeneralParams(theta1=t2, theta2=t1, sigma2=s2), truth)
    assert a == b


@given(
    v=st.lists(finite_floats, min_size=2, max_size=2).map(np.array),
    s2=st.floats(min_value=1e-3, max_value=1e3),
)
def test_wasserstein_positive_away_from_truth(v, s2):
    truth = _truth([0.0, 0.0])
    p = GeneralParams(theta1=v, theta2=-v, sigma2=s2)
    dist = wasserstein_general(p, truth)
    if np.linalg.norm(v) == 0.0 and s2 == 1.0:
        assert dist == 0.0
    else:
        assert dist > 0.0


# ---------------------------------------------------------------------------
# logsumexp2


def test_logsumexp2_examples():
    assert logsumexp2(0.0, 0.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert logsumexp2(1000.0, -1000.0) == 1000.0
    assert logsumexp2(1.0, 1.0) == pytest.approx(1.0 + math.log(2.0), rel=1e-15)


def test_logsumexp2_no_overflow_at_extremes():
    assert logsumexp2(1e6, 1e6) == pytest.approx(1e6 + math.log(2.0))
    assert logsumexp2(-1e6, -1e6) == pytest.approx(-1e6 + math.log(2.0))


def test_logsumexp2_rejects_nan():
    with pytest.raises(ValueError):
        logsumexp2(float("nan"), 0.0)
    with pytest.raises(ValueError):
        logsumexp2(np.array([0.0, float("nan")]), np.array([0.0, 0.0]))


def test_logsumexp2_broadcasts_over_arrays():
    out = logsumexp2(np.array([0.0, 1000.0]), np.array([0.0, -1000.0]))
    assert out.shape == (2,)
    assert out[0] == pytest.approx(math.log(2.0))
    assert out[1] == 1000.0


@given(a=finite_floats, b=finite_floats)
def test_logsumexp2_symmetric(a, b):
    x, y = logsumexp2(a, b), logsumexp2(b, a)
    assert x == pytest.approx(y, rel=1e-12, abs=1e-12)


@given(a=finite_floats, b=finite_floats, c=finite_floats)
def test_logsumexp2_shift_identity(a, b, c):
    shifted = logsumexp2(a + c, b + c)
    assert shifted == pytest.approx(c + logsumexp2(a, b), rel=1e-12, abs=1e-9)


# ---------------------------------------------------------------------------
# deterministic_sum


def _tree_sum_oracle(values):
    """The documented pairwise tree, replayed in exact rational arithmetic.

    Each node's exact sum is rounded to the nearest float64 (Python's
    Fraction -> float conversion is correctly rounded), which is precisely
    what IEEE addition does, so a correct implementation must match bitwise.
    """
    level = [Fraction(float(v)) for v in values]
    if not level:
        return 0.0
    while len(level) > 1:
        nxt = [
            Fraction(float(level[i] + level[i + 1]))
            for i in range(0, len(level) - 1, 2)
        ]
        if len(level) % 2 == 1:
            nxt.append(level[-1])
        level = nxt
    return float(level[0])


def test_deterministic_sum_empty_is_zero():
    assert deterministic_sum([]) == 0.0


def test_deterministic_sum_small_ints():
    assert deterministic_sum([1.0, 2.0, 3.0, 4.0]) == 10.0


def test_deterministic_sum_cancellation_matches_tree_oracle():
    values = [1e16, 1.0, -1e16]
    assert deterministic_sum(values) == _tree_sum_oracle(values)


@given(
    values=st.lists(
        st.floats(min_value=-1e12, max_value=1e12, allow_nan=False), min_size=0, max_size=40
    )
)
def test_deterministic_sum_matches_tree_oracle(values):
    assert deterministic_sum(values) == _tree_sum_oracle(values)


def test_deterministic_sum_bit_identical_across_calls():
    rng = np.random.default_rng(0)
    values = rng.normal(size=1001) * 10.0 ** rng.integers(-8, 8, size=1001)
    assert deterministic_sum(values) == deterministic_sum(values.copy())


def test_deterministic_sum_axis_reduction():
    m = np.arange(12, dtype=float).reshape(4, 3)
    by_rows = deterministic_sum(m, axis=0)
    assert by_rows.shape == (3,)
    np.testing.assert_allclose(by_rows, m.sum(axis=0), rtol=1e-15)
    by_cols = deterministic_sum(m, axis=1)
    np.testing.assert_allclose(by_cols, m.sum(axis=1), rtol=1e-15)


def test_deterministic_mean():
    assert deterministic_mean([2.0, 4.0]) == 3.0
    with pytest.raises(ValueError):
        deterministic_mean([])


# ---------------------------------------------------------------------------
# parameter containers


def test_truth_spec_rejects_zero_variance():
    with pytest.raises(ValueError):
        TruthSpec(theta_star=np.zeros(1), sigma_star2=0.0)


def test_isotropic_params_rejects_nonpositive_variance():
    with pytest.raises(ValueError):
        IsotropicParams(theta=np.zeros(2), sigma2=0.0)


def test_isotropic_params_rejects_nonfinite_theta():
    with pytest.raises(ValueError):
        IsotropicParams(theta=np.array([np.inf]), sigma2=1.0)


def test_diagonal_params_shape_and_positivity():
    with pytest.raises(ValueError):
        DiagonalParams(theta=np.zeros(2), sigma2=np.ones(3))
    with pytest.raises(ValueError):
        DiagonalParams(theta=np.zeros(2), sigma2=np.array([1.0, 0.0]))


def test_general_params_shape():
    with pytest.raises(ValueError):
        GeneralParams(theta1=np.zeros(2), theta2=np.zeros(3), sigma2=1.0)
    p = GeneralParams(theta1=np.zeros(3), theta2=np.ones(3), sigma2=2.0)
    assert p.d == 3


# ---------------------------------------------------------------------------
# seed coercion


def test_seed_entropy_passes_nonnegative_through_unchanged():
    assert seed_entropy(0) == 0
    assert seed_entropy(42) == 42
    assert seed_entropy(2**70 + 3) == 2**70 + 3  # not truncated to 64 bits


def test_seed_entropy_folds_negative_by_twos_complement():
    assert seed_entropy(-1) == 2**64 - 1
    assert seed_entropy(-12) == 2**64 - 12
    assert np.random.SeedSequence(seed_entropy(-12)).entropy == 2**64 - 12


def test_seed_entropy_coerces_tuples_elementwise():
    assert seed_entropy((5, -1, 0)) == (5, 2**64 - 1, 0)


@given(st.integers(min_value=-(2**63), max_value=2**63))
def test_seed_entropy_always_acceptable_and_deterministic(seed):
    folded = seed_entropy(seed)
    assert folded >= 0
    assert seed_entropy(seed) == folded
    np.random.SeedSequence(folded)  # must not raise
