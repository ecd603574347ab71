"""Isotropic profiled objective: sample/population values, gradients, Hessians."""
import math

import numpy as np
import pytest

from twomix import (
    Dataset,
    InfeasibleIterateError,
    IsotropicParams,
    TruthSpec,
    f_n,
    gauss_hermite,
    grad_f_n,
    moment_sigma2,
    neg_loglik,
    population_f,
    population_grad_f,
    population_hess_eigs,
    population_hess_f,
    sample_gaussian,
)
from twomix.isotropic import MomentCache, default_quad

from oracles import central_diff_gradient, central_diff_second, richardson_gradient

LOG_2PI = math.log(2.0 * math.pi)


def _dataset(rows, d=1):
    arr = np.asarray(rows, dtype=float).reshape(-1, d)
    return Dataset(
        samples=arr,
        n=arr.shape[0],
        d=d,
        seed=0,
        truth=TruthSpec(theta_star=np.zeros(d)),
    )


# ---------------------------------------------------------------------------
# quadrature rule


def test_quadrature_probabilists_normalization():
    for order in (20, 64, 128):
        q = gauss_hermite(order)
        assert abs(q.weights.sum() - 1.0) <= 1e-12
        assert abs(q.weights @ q.nodes**2 - 1.0) <= 1e-10


def test_quadrature_matches_gaussian_moments():
    q = default_quad()
    assert q.order >= 20
    assert abs(q.weights @ q.nodes) <= 1e-12  # odd moment vanishes
    assert q.weights @ q.nodes**4 == pytest.approx(3.0, rel=1e-10)


# ---------------------------------------------------------------------------
# neg_loglik


def test_neg_loglik_at_collapsed_mixture():
    data = _dataset([0.0])
    p = IsotropicParams(theta=[0.0], sigma2=1.0)
    assert neg_loglik(p, data) == pytest.approx(0.5 * LOG_2PI, rel=1e-12)


def test_neg_loglik_equal_component_densities():
    data = _dataset([0.0])
    p = IsotropicParams(theta=[1.0], sigma2=1.0)
    assert neg_loglik(p, data) == pytest.approx(0.5 * LOG_2PI + 0.5, rel=1e-12)


def test_neg_loglik_d2_symmetric_components():
    data = _dataset([[0.0, 0.0]], d=2)
    p = IsotropicParams(theta=[3.0, 4.0], sigma2=1.0)
    assert neg_loglik(p, data) == pytest.approx(LOG_2PI + 12.5, rel=1e-12)


def test_neg_loglik_dimension_mismatch():
    data = _dataset([[0.0, 0.0]], d=2)
    with pytest.raises(ValueError):
        neg_loglik(IsotropicParams(theta=[1.0], sigma2=1.0), data)


# ---------------------------------------------------------------------------
# moment_sigma2


def test_moment_sigma2_at_zero_location():
    cache = MomentCache(a_n=1.0, n=2, d=1)
    assert moment_sigma2([0.0], cache) == 1.0


def test_moment_sigma2_arithmetic():
    cache = MomentCache(a_n=4.0, n=1, d=1)
    assert moment_sigma2([1.0], cache) == 3.0


def test_moment_sigma2_boundary_error():
    cache = MomentCache(a_n=1.0, n=2, d=1)
    with pytest.raises(InfeasibleIterateError):
        moment_sigma2([1.1], cache)


def test_moment_cache_from_data():
    cache = MomentCache.from_data(_dataset([1.0, -1.0]))
    assert cache.a_n == 1.0


# ---------------------------------------------------------------------------
# f_n


def test_f_n_composition_identity(std_normal_data):
    data = std_normal_data(100, 3, seed=5)
    cache = MomentCache.from_data(data)
    theta = np.array([0.3, -0.2, 0.1])
    direct = neg_loglik(
        IsotropicParams(theta=theta, sigma2=moment_sigma2(theta, cache)), data, cache
    )
    assert f_n(theta, data, cache) == direct


def test_f_n_unit_distance_points():
    data = _dataset([1.0, -1.0])
    assert f_n([0.0], data) == pytest.approx(0.5 * LOG_2PI + 0.5, rel=1e-12)


def test_f_n_is_even(std_normal_data):
    data = std_normal_data(60, 2, seed=8)
    theta = np.array([0.4, -0.25])
    assert f_n(theta, data) == pytest.approx(f_n(-theta, data), rel=1e-14)


def test_f_n_infeasible_theta_errors(std_normal_data):
    data = std_normal_data(50, 1, seed=0)
    cache = MomentCache.from_data(data)
    with pytest.raises(InfeasibleIterateError):
        f_n([10.0], data, cache)


def test_f_n_dominates_profiled_minimum(std_normal_data):
    # the profiled objective at any theta sits above its global minimum,
    # located here by a dense grid scan (d=1)
    data = std_normal_data(500, 1, seed=14)
    cache = MomentCache.from_data(data)
    r_max = math.sqrt(cache.a_n)
    grid = np.linspace(-0.999 * r_max, 0.999 * r_max, 2001)
    floor = min(f_n([r], data, cache) for r in grid)
    rng = np.random.default_rng(3)
    for r in rng.uniform(-0.95 * r_max, 0.95 * r_max, size=50):
        assert f_n([r], data, cache) >= floor - 1e-12


# ---------------------------------------------------------------------------
# grad_f_n


def test_grad_f_n_zero_at_origin(std_normal_data):
    data = std_normal_data(80, 3, seed=2)
    assert np.array_equal(grad_f_n(np.zeros(3), data), np.zeros(3))


def test_grad_f_n_odd_symmetry(std_normal_data):
    data = std_normal_data(80, 2, seed=9)
    theta = np.array([0.35, -0.15])
    np.testing.assert_allclose(grad_f_n(-theta, data), -grad_f_n(theta, data), rtol=1e-13)


def test_grad_f_n_matches_fd_single_points(std_normal_data):
    # spot checks at step h = 1e-6 on healthy-gradient points
    for d, seed in ((1, 11), (4, 12)):
        data = std_normal_data(200, d, seed=seed)
        cache = MomentCache.from_data(data)
        rng = np.random.default_rng(seed)
        u = rng.normal(size=d)
        theta = 0.45 * math.sqrt(d) * u / np.linalg.norm(u)
        g = grad_f_n(theta, data, cache)
        g_fd = central_diff_gradient(lambda t: f_n(t, data, cache), theta, 1e-6)
        rel = np.linalg.norm(g_fd - g) / np.linalg.norm(g)
        assert rel < 1e-6


def test_grad_f_n_matches_fd_hundred_pairs(std_normal_data):
    # 100 random (theta, dataset) pairs spread over d in {1, 2, 4}
    rng = np.random.default_rng(0)
    dims = [1] * 34 + [2] * 33 + [4] * 33
    worst = 0.0
    for k, d in enumerate(dims):
        data = std_normal_data(200, d, seed=k)
        cache = MomentCache.from_data(data)
        u = rng.normal(size=d)
        u /= np.linalg.norm(u)
        theta = rng.uniform(0.25, 0.6) * math.sqrt(d) * u
        while theta @ theta >= 0.8 * d * cache.a_n:
            theta *= 0.8
        g = grad_f_n(theta, data, cache)
        g_fd = central_diff_gradient(lambda t: f_n(t, data, cache), theta, 1e-5)
        rel = np.linalg.norm(g_fd - g) / max(np.linalg.norm(g), 1e-10)
        worst = max(worst, rel)
    assert worst < 1e-6


# ---------------------------------------------------------------------------
# population objective


def test_population_f_at_origin():
    assert population_f(np.zeros(1)) == pytest.approx(0.5 * LOG_2PI + 0.5, rel=1e-14)
    assert population_f(np.zeros(4)) == pytest.approx(2.0 * LOG_2PI + 2.0, rel=1e-14)


def test_population_f_infeasible():
    with pytest.raises(ValueError):
        population_f(np.array([1.0]))  # ||theta||^2 = d


def test_population_f_matches_monte_carlo():
    # the quadrature value of the 1-D expectation against 1e7 Monte Carlo draws
    r = 0.3
    b = r / (1.0 - r**2)
    v = np.random.default_rng(123).standard_normal(10_000_000)
    term = np.logaddexp(b * v, -b * v)
    mc_mean = term.mean()
    se = term.std(ddof=1) / math.sqrt(term.size)
    f_mc = (
        math.log(2.0)
        + 0.5 * LOG_2PI
        + 0.5 * math.log(1.0 - r**2)
        + (1.0 + r**2) / (2.0 * (1.0 - r**2))
        - mc_mean
    )
    assert abs(population_f(np.array([r])) - f_mc) <= 3.0 * se


def test_population_grad_zero_at_origin():
    assert np.array_equal(population_grad_f(np.zeros(3)), np.zeros(3))


def test_population_grad_matches_fd():
    g = population_grad_f(np.array([0.2]), d=1)[0]
    g_fd = richardson_gradient(lambda t: population_f(t, d=1), np.array([0.2]))[0]
    assert abs(g_fd - g) / abs(g) < 1e-8


def test_population_grad_parallel_to_theta():
    rng = np.random.default_rng(4)
    for _ in range(5):
        theta = rng.uniform(-0.5, 0.5, size=4)
        g = population_grad_f(theta)
        cos = g @ theta / (np.linalg.norm(g) * np.linalg.norm(theta))
        assert abs(abs(cos) - 1.0) <= 1e-10


def test_population_hess_zero_at_origin():
    assert population_hess_f(np.zeros(1)) == 0.0
    assert np.array_equal(population_hess_f(np.zeros(4)), np.zeros((4, 4)))


def test_population_hess_matches_fd():
    h = population_hess_f(np.array([0.2]), d=1)
    h_fd = central_diff_second(lambda r: population_f(np.array([r]), d=1), 0.2, 1e-3)
    assert abs(h_fd - h) < 1e-6


def test_population_hess_rank_one_spectrum():
    rng = np.random.default_rng(6)
    theta = rng.uniform(-0.4, 0.4, size=4)
    H = population_hess_f(theta)
    lam0, lam_top = population_hess_eigs(theta)
    eigs = np.sort(np.linalg.eigvalsh(H))
    expected = np.sort([lam0, lam0, lam0, lam_top])
    np.testing.assert_allclose(eigs, expected, rtol=1e-12, atol=1e-15)


def test_population_quadrature_order_converged():
    # order 64 against order 128 on representative radii: doubling the order
    # moves values, gradients, and Hessian eigenvalues by < 1e-8 relative;
    # a tiny absolute floor covers near-flat points where the value itself
    # sits at the round-off level of the O(1) terms it is assembled from
    q64, q128 = gauss_hermite(64), gauss_hermite(128)
    for d, radii in ((1, (0.1, 0.25, 0.4)), (4, (0.2, 0.5, 0.8))):
        for r in radii:
            theta = np.zeros(d)
            theta[0] = r
            f1, f2 = population_f(theta, quad=q64), population_f(theta, quad=q128)
            assert abs(f1 - f2) <= 1e-10 * abs(f2)
            g1, g2 = population_grad_f(theta, quad=q64), population_grad_f(theta, quad=q128)
            assert np.linalg.norm(g1 - g2) <= 1e-8 * np.linalg.norm(g2) + 1e-14
            e1 = np.asarray(population_hess_eigs(theta, quad=q64))
            e2 = np.asarray(population_hess_eigs(theta, quad=q128))
            assert np.max(np.abs(e1 - e2)) <= 1e-8 * np.max(np.abs(e2)) + 1e-14


def test_sample_gradient_deviation_scales_like_root_n(std_normal_data):
    # max over a fixed 20-point grid of |grad_f_n - population grad| should
    # shrink like n^{-1/2}; fitted exponent within +/- 0.1 of -0.5
    grid = np.linspace(0.05, 0.5, 20)
    pop = np.array([population_grad_f(np.array([r]), d=1)[0] for r in grid])
    n_grid = (10_000, 100_000, 1_000_000)
    medians = []
    for n in n_grid:
        devs = []
        for s in range(10):
            data = std_normal_data(n, 1, seed=97 * n + s)
            cache = MomentCache.from_data(data)
            dev = max(
                abs(grad_f_n(np.array([r]), data, cache)[0] - pop[i])
                for i, r in enumerate(grid)
            )
            devs.append(dev)
        medians.append(np.median(devs))
    slope = np.polyfit(np.log(np.asarray(n_grid, float)), np.log(medians), 1)[0]
    assert -0.6 < slope < -0.4
