"""Isotropic symmetric-mixture objectives: sample and population level.

The model fits 0.5*N(-theta, sigma2*I_d) + 0.5*N(theta, sigma2*I_d). For a
fixed location the negative log-likelihood is minimized in closed form at the
profiled variance

    sigma2(theta) = a_n - ||theta||^2 / d,        a_n = (1/(nd)) sum ||X_i||^2,

and f_n(theta) denotes the likelihood evaluated there. Population quantities
(f, grad f, hess f) are the n -> infinity limits under X ~ N(0, I_d); by
rotational symmetry they reduce to one-dimensional normal expectations, which
are evaluated with Gauss-Hermite quadrature:

    f(theta) = log 2 + (d/2) log(2 pi) + (d/2) log(1 - u)
               + (d + ||theta||^2) / (2 (1 - u))
               - E[ log(exp(-V b) + exp(V b)) ],

with u = ||theta||^2 / d, b = ||theta|| / (1 - u), V ~ N(0, 1). The gradient
and Hessian come from differentiating this representation; the Hessian has
the rank-one structure lam0 * I + lam1 * theta theta^T.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    InfeasibleIterateError,
    IsotropicParams,
    deterministic_mean,
    logsumexp2,
)
from .sampling import Dataset
from .quadrature import QuadratureRule, gauss_hermite

__all__ = [
    "MomentCache",
    "neg_loglik",
    "moment_sigma2",
    "f_n",
    "grad_f_n",
    "population_f",
    "population_grad_f",
    "population_hess_f",
    "population_hess_eigs",
]

_LOG_2PI = float(np.log(2.0 * np.pi))

_default_quad_cache: QuadratureRule | None = None


def default_quad() -> QuadratureRule:
    global _default_quad_cache
    if _default_quad_cache is None:
        _default_quad_cache = gauss_hermite()
    return _default_quad_cache


def sech2(x):
    """sech(x)^2 evaluated without overflow for any finite x."""
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def row_sq_norms(X: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", X, X)


@dataclass(frozen=True, eq=False)
class MomentCache:
    """Pooled second moment a_n = (1/(nd)) sum ||X_i||^2 plus shape metadata."""

    a_n: float
    n: int
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a_n", float(self.a_n))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        if not np.isfinite(self.a_n) or self.a_n <= 0.0:
            raise ValueError("a_n must be positive and finite")

    @classmethod
    def from_data(cls, data: Dataset) -> "MomentCache":
        a_n = deterministic_mean(row_sq_norms(data.samples)) / data.d
        return cls(a_n=a_n, n=data.n, d=data.d)


def _theta_vector(theta, d: int | None = None) -> np.ndarray:
    t = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if t.ndim != 1:
        raise ValueError("theta must be a 1-D vector")
    if d is not None and t.shape[0] != d:
        raise ValueError(f"theta has length {t.shape[0]}, expected d={d}")
    if not np.all(np.isfinite(t)):
        raise ValueError("theta must be finite")
    return t


def neg_loglik(params: IsotropicParams, data: Dataset, cache: MomentCache | None = None) -> float:
    """Sample negative log-likelihood of the symmetric isotropic mixture.

    Both component exponents share the quadratic term, so the log-density of
    a row collapses to a two-term log-sum-exp over +/- X_i^T theta / sigma2.
    """
    if params.d != data.d:
        raise ValueError("params and data dimension mismatch")
    X = data.samples
    theta, s2 = params.theta, params.sigma2
    mean_sq = (
        cache.a_n * data.d if cache is not None else deterministic_mean(row_sq_norms(X))
    )
    t = X @ theta / s2
    cross = deterministic_mean(logsumexp2(t, -t))
    return (
        np.log(2.0)
        + 0.5 * data.d * (_LOG_2PI + np.log(s2))
        + (mean_sq + theta @ theta) / (2.0 * s2)
        - cross
    )


def moment_sigma2(theta, cache: MomentCache) -> float:
    """Profiled variance a_n - ||theta||^2/d; the exact minimizer over sigma2.

    Strictly positive or the iterate has left the feasible region; no
    projection is applied, infeasibility is an error the caller must see.
    """
    t = _theta_vector(theta, cache.d)
    s2 = cache.a_n - (t @ t) / cache.d
    if not s2 > 0.0:
        raise InfeasibleIterateError(
            f"profiled variance {s2:.6g} <= 0: ||theta||^2 exceeds d * a_n"
        )
    return float(s2)


def f_n(theta, data: Dataset, cache: MomentCache | None = None) -> float:
    """Profiled sample objective f_n(theta) = neg_loglik at the profiled variance."""
    cache = cache or MomentCache.from_data(data)
    s2 = moment_sigma2(theta, cache)
    t = _theta_vector(theta, cache.d)
    return neg_loglik(IsotropicParams(theta=t, sigma2=s2), data, cache=cache)


def grad_f_n(theta, data: Dataset, cache: MomentCache | None = None) -> np.ndarray:
    """Exact gradient of f_n, including the chain term through the profiled variance.

    With s = a_n - ||theta||^2/d and t_i = X_i^T theta / s:

        grad = theta (a_n + ||theta||^2/d) / s^2
               - (1/n) sum [ X_i s + 2 (X_i^T theta) theta / d ] tanh(t_i) / s^2
    """
    cache = cache or MomentCache.from_data(data)
    theta = _theta_vector(theta, cache.d)
    if data.d != cache.d:
        raise ValueError("data and cache dimension mismatch")
    s = moment_sigma2(theta, cache)
    X = data.samples
    d = cache.d
    xt = X @ theta
    tau = np.tanh(xt / s)
    mean_x_tau = deterministic_mean(X * tau[:, None], axis=0)
    mean_xt_tau = deterministic_mean(xt * tau)
    norm_sq = theta @ theta
    g = (
        theta * (cache.a_n + norm_sq / d)
        - mean_x_tau * s
        - (2.0 / d) * mean_xt_tau * theta
    ) / s**2
    return g


def _feasible_population(theta, d: int | None) -> tuple[np.ndarray, int, float, float, float]:
    t = _theta_vector(theta, d)
    dd = t.shape[0]
    norm_sq = float(t @ t)
    u = norm_sq / dd
    if not u < 1.0:
        raise ValueError("population objective requires ||theta||^2 < d")
    return t, dd, norm_sq, u, 1.0 - u


def population_f(theta, d: int | None = None, quad: QuadratureRule | None = None) -> float:
    """Population profiled objective f(theta), quadrature-evaluated."""
    quad = quad or default_quad()
    t, dd, norm_sq, u, denom = _feasible_population(theta, d)
    b = np.sqrt(norm_sq) / denom
    bz = b * quad.nodes
    e_term = float(quad.weights @ np.logaddexp(bz, -bz))
    return (
        np.log(2.0)
        + 0.5 * dd * _LOG_2PI
        + 0.5 * dd * np.log(denom)
        + (dd + norm_sq) / (2.0 * denom)
        - e_term
    )


def population_grad_f(theta, d: int | None = None, quad: QuadratureRule | None = None) -> np.ndarray:
    """Population gradient; parallel to theta, exactly zero at theta = 0."""
    quad = quad or default_quad()
    t, dd, norm_sq, u, denom = _feasible_population(theta, d)
    r = np.sqrt(norm_sq)
    if r == 0.0:
        return np.zeros(dd)
    b = r / denom
    m1 = float(quad.weights @ (quad.nodes * np.tanh(b * quad.nodes)))
    coef = (1.0 + u) / denom**2 * (1.0 - m1 / r)
    return coef * t


def _hess_lambdas(r: float, dd: int, quad: QuadratureRule) -> tuple[float, float]:
    """Eigenstructure coefficients of the population Hessian at radius r > 0."""
    norm_sq = r * r
    u = norm_sq / dd
    denom = 1.0 - u
    b = r / denom
    z = quad.nodes
    m1 = float(quad.weights @ (z * np.tanh(b * z)))
    m2 = float(quad.weights @ (z * z * sech2(b * z)))
    lam0 = (1.0 - m1 / r) * (1.0 + u) / denom**2
    lam1 = (
        (6.0 / dd + 2.0 * norm_sq / dd**2) / denom**3
        - (6.0 * norm_sq / dd + 3.0 * norm_sq**2 / dd**2 - 1.0) / (denom**3 * r**3) * m1
        - (1.0 + u) ** 2 / (denom**4 * norm_sq) * m2
    )
    return lam0, lam1


def population_hess_f(theta, d: int | None = None, quad: QuadratureRule | None = None):
    """Population Hessian: scalar for d=1, else lam0*I + lam1*theta theta^T.

    At theta = 0 the limit is the zero matrix (the landscape is completely
    flat at the over-specified truth).
    """
    quad = quad or default_quad()
    t, dd, norm_sq, u, denom = _feasible_population(theta, d)
    r = np.sqrt(norm_sq)
    if dd == 1:
        if r == 0.0:
            return 0.0
        lam0, lam1 = _hess_lambdas(r, 1, quad)
        return float(lam0 + lam1 * norm_sq)
    if r == 0.0:
        return np.zeros((dd, dd))
    lam0, lam1 = _hess_lambdas(r, dd, quad)
    return lam0 * np.eye(dd) + lam1 * np.outer(t, t)


def population_hess_eigs(theta, d: int | None = None, quad: QuadratureRule | None = None) -> tuple[float, float]:
    """(lam0, lam0 + lam1*||theta||^2): the two distinct Hessian eigenvalues."""
    quad = quad or default_quad()
    t, dd, norm_sq, u, denom = _feasible_population(theta, d)
    r = np.sqrt(norm_sq)
    if r == 0.0:
        return 0.0, 0.0
    lam0, lam1 = _hess_lambdas(r, dd, quad)
    return lam0, lam0 + lam1 * norm_sq
