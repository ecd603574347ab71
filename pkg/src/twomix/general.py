"""General two-location mixture objectives: 0.5*N(theta1, s*I) + 0.5*N(theta2, s*I).

Unlike the symmetric models the two locations move independently. The
variance profile used by the first-order solver is the closed form

    sigma2(theta1, theta2) = (1/(nd)) sum ||X_i - (theta1+theta2)/2||^2
                             - ||theta1 - theta2||^2 / (4d),

expanded through the cached sufficient statistics (pooled second moment and
sample mean). Responsibilities follow the usual posterior-weight formula and
are computed in logistic form so extreme exponents saturate instead of
overflowing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import (
    GeneralParams,
    InfeasibleIterateError,
    deterministic_mean,
    logsumexp2,
)
from .sampling import Dataset
from .isotropic import _LOG_2PI, row_sq_norms

__all__ = [
    "GeneralMomentCache",
    "neg_loglik_general",
    "responsibilities",
    "profile_sigma2_general",
    "f_tilde_n",
    "grad_f_tilde_n",
]


@dataclass(frozen=True, eq=False)
class GeneralMomentCache:
    """sum_sq = (1/(nd)) sum ||X_i||^2 and mean = (1/n) sum X_i."""

    sum_sq: float
    mean: np.ndarray
    n: int
    d: int

    def __post_init__(self):
        object.__setattr__(self, "sum_sq", float(self.sum_sq))
        mean = np.asarray(self.mean, dtype=np.float64)
        if mean.shape != (self.d,):
            raise ValueError("mean must be a length-d vector")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        if not np.isfinite(self.sum_sq) or self.sum_sq <= 0.0:
            raise ValueError("sum_sq must be positive and finite")

    @classmethod
    def from_data(cls, data: Dataset) -> "GeneralMomentCache":
        return cls(
            sum_sq=deterministic_mean(row_sq_norms(data.samples)) / data.d,
            mean=deterministic_mean(data.samples, axis=0),
            n=data.n,
            d=data.d,
        )


def _pair(theta1, theta2, d: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    t1 = np.atleast_1d(np.asarray(theta1, dtype=np.float64))
    t2 = np.atleast_1d(np.asarray(theta2, dtype=np.float64))
    if t1.shape != t2.shape or t1.ndim != 1:
        raise ValueError("theta1 and theta2 must be 1-D vectors of equal length")
    if d is not None and t1.shape[0] != d:
        raise ValueError(f"locations must have length {d}")
    if not (np.all(np.isfinite(t1)) and np.all(np.isfinite(t2))):
        raise ValueError("locations must be finite")
    return t1, t2


def _component_exponents(X, theta1, theta2, sigma2):
    # a_k = -||x - theta_k||^2 / (2 sigma2), the log of each component's
    # unnormalized density
    a1 = (X @ theta1 - 0.5 * (theta1 @ theta1)) / sigma2
    a2 = (X @ theta2 - 0.5 * (theta2 @ theta2)) / sigma2
    return a1, a2


def neg_loglik_general(
    params: GeneralParams, data: Dataset, cache: GeneralMomentCache | None = None
) -> float:
    """-(1/n) sum log(0.5 phi(X; theta1, s I) + 0.5 phi(X; theta2, s I))."""
    if params.d != data.d:
        raise ValueError("params and data dimension mismatch")
    X = data.samples
    s2 = params.sigma2
    a1, a2 = _component_exponents(X, params.theta1, params.theta2, s2)
    # common factor exp(-||x||^2/(2 s2)) restored through the mean square term
    mean_sq = (
        cache.sum_sq * data.d if cache is not None else deterministic_mean(row_sq_norms(X))
    )
    cross = deterministic_mean(logsumexp2(a1, a2))
    return (
        np.log(2.0)
        + 0.5 * data.d * (_LOG_2PI + np.log(s2))
        + mean_sq / (2.0 * s2)
        - cross
    )


def _resp_rows(theta1, theta2, sigma2, X) -> np.ndarray:
    a1, a2 = _component_exponents(X, theta1, theta2, sigma2)
    return expit(a2 - a1)


def responsibilities(params: GeneralParams, x) -> float:
    """Posterior weight of the second component at a single point x.

    Equals 1 / (1 + exp((||x-theta2||^2 - ||x-theta1||^2)/(2 sigma2))),
    evaluated as a logistic of the exponent difference.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if xv.shape != params.theta1.shape:
        raise ValueError("x must have the model dimension")
    return float(_resp_rows(params.theta1, params.theta2, params.sigma2, xv[None, :])[0])


def profile_sigma2_general(theta1, theta2, cache: GeneralMomentCache) -> float:
    """Closed-form profiled variance for the two-location model."""
    t1, t2 = _pair(theta1, theta2, cache.d)
    mid = 0.5 * (t1 + t2)
    diff = t1 - t2
    d = cache.d
    s2 = (
        cache.sum_sq
        - 2.0 * (cache.mean @ mid) / d
        + (mid @ mid) / d
        - (diff @ diff) / (4.0 * d)
    )
    if not s2 > 0.0:
        raise InfeasibleIterateError(
            f"profiled variance {s2:.6g} <= 0 for the given location pair"
        )
    return float(s2)


def f_tilde_n(theta1, theta2, data: Dataset, cache: GeneralMomentCache | None = None) -> float:
    cache = cache or GeneralMomentCache.from_data(data)
    t1, t2 = _pair(theta1, theta2, cache.d)
    s2 = profile_sigma2_general(t1, t2, cache)
    return neg_loglik_general(GeneralParams(theta1=t1, theta2=t2, sigma2=s2), data)


def grad_f_tilde_n(
    theta1, theta2, data: Dataset, cache: GeneralMomentCache | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of f_tilde_n with respect to both locations.

    Built as partial-likelihood gradients plus the chain contribution through
    the profiled variance:

        dL/dtheta_k      = -(1/(n s)) sum w_ik (X_i - theta_k)
        dL/dsigma2       = d/(2s) - (1/(2 n s^2)) sum_k sum_i w_ik ||X_i-theta_k||^2
        dsigma2/dtheta_1 = -(mean - mid)/d - diff/(2d)   (mirrored for theta_2)

    where w_i2 is the responsibility of component 2 and w_i1 = 1 - w_i2.
    """
    cache = cache or GeneralMomentCache.from_data(data)
    t1, t2 = _pair(theta1, theta2, cache.d)
    if data.d != cache.d:
        raise ValueError("data and cache dimension mismatch")
    s2 = profile_sigma2_general(t1, t2, cache)
    X = data.samples
    d = cache.d

    w2 = _resp_rows(t1, t2, s2, X)
    w1 = 1.0 - w2
    dL_dt1 = -(deterministic_mean(X * w1[:, None], axis=0) - deterministic_mean(w1) * t1) / s2
    dL_dt2 = -(deterministic_mean(X * w2[:, None], axis=0) - deterministic_mean(w2) * t2) / s2

    row_sq = row_sq_norms(X)
    q1 = row_sq - 2.0 * (X @ t1) + t1 @ t1
    q2 = row_sq - 2.0 * (X @ t2) + t2 @ t2
    mean_wq = deterministic_mean(w1 * q1 + w2 * q2)
    dL_ds2 = 0.5 * d / s2 - mean_wq / (2.0 * s2**2)

    mid = 0.5 * (t1 + t2)
    diff = t1 - t2
    ds2_dt1 = -(cache.mean - mid) / d - diff / (2.0 * d)
    ds2_dt2 = -(cache.mean - mid) / d + diff / (2.0 * d)

    return dL_dt1 + dL_ds2 * ds2_dt1, dL_dt2 + dL_ds2 * ds2_dt2
