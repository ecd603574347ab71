"""Diagonal-covariance profiled objective: values, gradients, population pieces."""
import math

import numpy as np
import pytest

from twomix import (
    Dataset,
    DiagonalParams,
    InfeasibleIterateError,
    IsotropicParams,
    TruthSpec,
    f_bar_n,
    f_n,
    grad_f_bar_n,
    grad_f_n,
    neg_loglik,
    neg_loglik_diag,
    population_f_bar,
    population_grad_f,
    population_grad_f_bar,
    profile_sigma2_diag,
    sample_gaussian,
)
from twomix.diagonal import (
    DiagonalMomentCache,
    population_f_bar_batch,
    population_grad_f_bar_batch,
)
from twomix.isotropic import MomentCache

from oracles import central_diff_gradient, richardson_gradient

LOG_2PI = math.log(2.0 * math.pi)


def _dataset(rows, d):
    arr = np.asarray(rows, dtype=float).reshape(-1, d)
    return Dataset(
        samples=arr,
        n=arr.shape[0],
        d=d,
        seed=0,
        truth=TruthSpec(theta_star=np.zeros(d)),
    )


# ---------------------------------------------------------------------------
# neg_loglik_diag


def test_neg_loglik_diag_standard_normal_mode():
    data = _dataset([[0.0, 0.0]], d=2)
    p = DiagonalParams(theta=[0.0, 0.0], sigma2=[1.0, 1.0])
    assert neg_loglik_diag(p, data) == pytest.approx(LOG_2PI, rel=1e-12)


def test_neg_loglik_diag_collapsed_mixture_unequal_variances():
    # theta = 0 collapses the mixture to a single axis-aligned Gaussian;
    # the point (1, 0) contributes only through the first coordinate
    data = _dataset([[1.0, 0.0]], d=2)
    got = neg_loglik_diag(DiagonalParams(theta=[0.0, 0.0], sigma2=[1.0, 4.0]), data)
    assert got == pytest.approx(LOG_2PI + math.log(2.0) + 0.5, rel=1e-12)
    # companion pin: halving the second variance shifts the value by -log(2)/2
    got_half = neg_loglik_diag(DiagonalParams(theta=[0.0, 0.0], sigma2=[1.0, 2.0]), data)
    assert got_half == pytest.approx(2.684450, abs=1e-6)


def test_neg_loglik_diag_nests_isotropic(std_normal_data):
    data = std_normal_data(40, 3, seed=17)
    rng = np.random.default_rng(17)
    theta = rng.uniform(-0.5, 0.5, size=3)
    s2 = 1.7
    tied = neg_loglik_diag(DiagonalParams(theta=theta, sigma2=np.full(3, s2)), data)
    iso = neg_loglik(IsotropicParams(theta=theta, sigma2=s2), data)
    assert tied == pytest.approx(iso, rel=1e-12)


def test_neg_loglik_diag_rejects_nonpositive_variance():
    data = _dataset([[0.0, 0.0]], d=2)
    with pytest.raises(ValueError):
        DiagonalParams(theta=[0.0, 0.0], sigma2=[1.0, 0.0])


# ---------------------------------------------------------------------------
# profile_sigma2_diag


def test_profile_sigma2_diag_arithmetic():
    cache = DiagonalMomentCache(m2=np.array([1.0, 4.0]), n=2, d=2)
    np.testing.assert_array_equal(profile_sigma2_diag([0.0, 1.0], cache), [1.0, 3.0])


def test_profile_sigma2_diag_at_zero_returns_m2():
    cache = DiagonalMomentCache(m2=np.array([2.5, 0.5, 1.0]), n=3, d=3)
    np.testing.assert_array_equal(profile_sigma2_diag([0.0, 0.0, 0.0], cache), cache.m2)


def test_profile_sigma2_diag_boundary_names_coordinate():
    cache = DiagonalMomentCache(m2=np.array([1.0, 4.0]), n=2, d=2)
    with pytest.raises(InfeasibleIterateError, match="coordinate 0"):
        profile_sigma2_diag([1.0, 0.0], cache)


# ---------------------------------------------------------------------------
# f_bar_n / grad_f_bar_n


def test_f_bar_n_composition_identity(std_normal_data):
    data = std_normal_data(60, 2, seed=21)
    cache = DiagonalMomentCache.from_data(data)
    theta = np.array([0.3, -0.2])
    direct = neg_loglik_diag(
        DiagonalParams(theta=theta, sigma2=profile_sigma2_diag(theta, cache)), data
    )
    assert f_bar_n(theta, data, cache) == direct


def test_grad_f_bar_n_zero_at_origin(std_normal_data):
    data = std_normal_data(50, 2, seed=3)
    assert np.array_equal(grad_f_bar_n(np.zeros(2), data), np.zeros(2))


def test_grad_f_bar_n_matches_fd(std_normal_data):
    data = std_normal_data(200, 4, seed=77)
    cache = DiagonalMomentCache.from_data(data)
    rng = np.random.default_rng(77)
    theta = rng.uniform(-0.5, 0.5, size=4)
    g = grad_f_bar_n(theta, data, cache)
    g_fd = central_diff_gradient(lambda t: f_bar_n(t, data, cache), theta, 1e-5)
    assert np.linalg.norm(g_fd - g) / np.linalg.norm(g) < 1e-6


def test_grad_f_bar_n_sign_flip_family(std_normal_data):
    # full flip: exact oddness of the sample gradient
    data = std_normal_data(80, 3, seed=31)
    cache = DiagonalMomentCache.from_data(data)
    theta = np.array([0.3, -0.2, 0.4])
    g_pos = grad_f_bar_n(theta, data, cache)
    g_neg = grad_f_bar_n(-theta, data, cache)
    np.testing.assert_allclose(g_neg, -g_pos, rtol=1e-12, atol=1e-15)
    # single-coordinate flips are equivariant with the matching data reflection
    S = np.diag([1.0, -1.0, 1.0])
    reflected = Dataset(
        samples=data.samples @ S,
        n=data.n,
        d=data.d,
        seed=data.seed,
        truth=data.truth,
    )
    f_flip = f_bar_n(S @ theta, reflected)
    assert f_flip == pytest.approx(f_bar_n(theta, data), rel=1e-12)


def test_f_bar_n_even_under_full_flip(std_normal_data):
    data = std_normal_data(80, 2, seed=32)
    theta = np.array([0.25, -0.35])
    assert f_bar_n(-theta, data) == pytest.approx(f_bar_n(theta, data), rel=1e-12)


def test_grad_f_bar_coordinate_decoupling_in_expectation(std_normal_data):
    # with theta supported on coordinate 0 only, the coordinate-1 gradient is
    # zero in expectation over datasets but generically nonzero per dataset
    theta = np.array([0.3, 0.0])
    vals = np.empty(10_000)
    for k in range(vals.size):
        data = std_normal_data(50, 2, seed=500_000 + k)
        vals[k] = grad_f_bar_n(theta, data)[1]
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean()) <= 3.0 * se
    assert np.mean(vals != 0.0) > 0.99


# ---------------------------------------------------------------------------
# population pieces


def test_population_grad_f_bar_zero_at_origin():
    assert np.array_equal(population_grad_f_bar(np.zeros(3)), np.zeros(3))


def test_population_grad_f_bar_nests_isotropic_d1():
    # a single-nonzero-coordinate slice reduces to the d=1 isotropic gradient,
    # and the off coordinates vanish identically
    for r in (0.1, 0.3, 0.45):
        g = population_grad_f_bar(np.array([0.0, r, 0.0]))
        iso = population_grad_f(np.array([r]), d=1)[0]
        assert g[1] == pytest.approx(iso, rel=1e-10)
        assert g[0] == 0.0 and g[2] == 0.0


def test_population_grad_f_bar_matches_fd():
    theta = np.array([0.2, 0.3])
    g = population_grad_f_bar(theta)
    g_fd = richardson_gradient(lambda t: population_f_bar(t), theta)
    assert np.max(np.abs(g_fd - g)) < 1e-8


def test_population_f_bar_even_per_coordinate():
    theta = np.array([0.2, 0.3])
    base = population_f_bar(theta)
    for signs in ([-1, 1], [1, -1], [-1, -1]):
        assert population_f_bar(theta * signs) == base


def test_population_batch_matches_scalar():
    rng = np.random.default_rng(9)
    thetas = rng.uniform(-0.6, 0.6, size=(7, 3))
    fb = population_f_bar_batch(thetas)
    gb = population_grad_f_bar_batch(thetas)
    for i, th in enumerate(thetas):
        assert fb[i] == population_f_bar(th)
        np.testing.assert_allclose(gb[i], population_grad_f_bar(th), rtol=1e-12, atol=1e-15)


def test_population_rejects_boundary_theta():
    with pytest.raises(ValueError):
        population_f_bar(np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        population_grad_f_bar(np.array([1.2]))
