"""Parameter containers, error metrics, and numeric reduction utilities.

Conventions shared by every module in the package:

- locations are 1-D float64 vectors of length ``d``;
- scale quantities are stored as *variances* (sigma squared); standard
  deviations are derived on demand and never stored;
- the sign-symmetric models treat ``theta`` and ``-theta`` as the same
  mixture, so location error is measured up to sign;
- sums over samples go through :func:`deterministic_sum`, a fixed-order
  pairwise tree, so repeated evaluations are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FitError",
    "InfeasibleIterateError",
    "NonFiniteIterateError",
    "DegenerateComponentError",
    "TruthSpec",
    "IsotropicParams",
    "DiagonalParams",
    "GeneralParams",
    "location_error_symmetric",
    "scale_error",
    "wasserstein_general",
    "logsumexp2",
    "deterministic_sum",
    "seed_entropy",
]


class FitError(RuntimeError):
    """Base class for solver-step failures that terminate a fit."""


class InfeasibleIterateError(FitError):
    """A profiled variance became non-positive: the iterate left the feasible region."""


class NonFiniteIterateError(FitError):
    """An iterate, gradient, or objective value stopped being finite."""


class DegenerateComponentError(FitError):
    """A mixture component lost all responsibility mass."""


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class TruthSpec:
    """Data-generating parameters: samples are N(theta_star, sigma_star2 * I)."""

    theta_star: np.ndarray
    sigma_star2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta_star", _as_vector(self.theta_star, "theta_star"))
        object.__setattr__(self, "sigma_star2", float(self.sigma_star2))
        if not np.isfinite(self.sigma_star2) or self.sigma_star2 <= 0.0:
            raise ValueError("sigma_star2 must be positive and finite")

    @property
    def d(self) -> int:
        return self.theta_star.shape[0]


@dataclass(frozen=True, eq=False)
class IsotropicParams:
    """Symmetric mixture 0.5*N(-theta, sigma2*I) + 0.5*N(theta, sigma2*I)."""

    theta: np.ndarray
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _as_vector(self.theta, "theta"))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive and finite")

    @property
    def d(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True, eq=False)
class DiagonalParams:
    """Symmetric mixture with per-coordinate variances (sigma2 is a vector)."""

    theta: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _as_vector(self.theta, "theta"))
        object.__setattr__(self, "sigma2", _as_vector(self.sigma2, "sigma2"))
        if self.sigma2.shape != self.theta.shape:
            raise ValueError("theta and sigma2 must have the same length")
        if np.any(self.sigma2 <= 0.0):
            raise ValueError("all entries of sigma2 must be positive")

    @property
    def d(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True, eq=False)
class GeneralParams:
    """Equal-weight mixture 0.5*N(theta1, sigma2*I) + 0.5*N(theta2, sigma2*I)."""

    theta1: np.ndarray
    theta2: np.ndarray
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "theta1", _as_vector(self.theta1, "theta1"))
        object.__setattr__(self, "theta2", _as_vector(self.theta2, "theta2"))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if self.theta1.shape != self.theta2.shape:
            raise ValueError("theta1 and theta2 must have the same length")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive and finite")

    @property
    def d(self) -> int:
        return self.theta1.shape[0]


def location_error_symmetric(theta, theta_star) -> float:
    """min(||theta - theta_star||, ||theta + theta_star||).

    The symmetric mixture is invariant under theta -> -theta, so estimation
    error is measured against the closer of the two sign choices.
    """
    t = _as_vector(theta, "theta")
    ts = _as_vector(theta_star, "theta_star")
    if t.shape != ts.shape:
        raise ValueError("theta and theta_star must have the same length")
    return float(min(np.linalg.norm(t - ts), np.linalg.norm(t + ts)))


def scale_error(sigma2, sigma_star2) -> float:
    """|sigma2 - sigma_star2|, both interpreted as variances."""
    s, ss = float(sigma2), float(sigma_star2)
    if s <= 0.0 or ss <= 0.0:
        raise ValueError("variances must be positive")
    return abs(s - ss)


def wasserstein_general(params: GeneralParams, truth: TruthSpec) -> float:
    """First-order Wasserstein distance between the fitted and true mixing measures.

    Atoms live in (theta, sigma) space with the Euclidean ground metric; the
    truth places both atoms at (theta_star, sigma_star), so the optimal
    coupling is forced and the distance is the average atom displacement.
    """
    if params.d != truth.d:
        raise ValueError("params and truth dimension mismatch")
    sig = np.sqrt(params.sigma2)
    sig_star = np.sqrt(truth.sigma_star2)
    a1 = np.concatenate([params.theta1 - truth.theta_star, [sig - sig_star]])
    a2 = np.concatenate([params.theta2 - truth.theta_star, [sig - sig_star]])
    return float(0.5 * (np.linalg.norm(a1) + np.linalg.norm(a2)))


def logsumexp2(a, b):
    """log(exp(a) + exp(b)) without overflow: max(a,b) + log1p(exp(-|a-b|)).

    Accepts scalars or arrays (broadcast). NaN inputs are rejected; infinities
    are allowed and handled by the underlying formula.
    """
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if np.any(np.isnan(a_arr)) or np.any(np.isnan(b_arr)):
        raise ValueError("logsumexp2 received NaN input")
    out = np.logaddexp(a_arr, b_arr)
    if out.ndim == 0:
        return float(out)
    return out


def seed_entropy(seed_material):
    """Coerce integer seed material for np.random.SeedSequence, which rejects
    negative entropy. Negative integers are folded by 64-bit two's complement;
    non-negative integers pass through unchanged, so existing streams keep
    their exact values. Tuples are coerced elementwise.
    """

    def _fold(s):
        s = int(s)
        return s if s >= 0 else s & 0xFFFFFFFFFFFFFFFF

    if isinstance(seed_material, tuple):
        return tuple(_fold(s) for s in seed_material)
    return _fold(seed_material)


def deterministic_sum(values, axis: int = 0):
    """Sum by a fixed-order pairwise tree; bit-identical across runs.

    The tree is the bottom-up fold: adjacent pairs are added, an odd trailing
    element is carried to the next level unchanged, and the process repeats
    until one element remains. The shape of the tree depends only on the
    length of the input, so the result is a pure function of the input values
    in their given order (thread count and chunking cannot change it).

    1-D input returns a float; for higher-dimensional input the reduction
    runs along ``axis`` (needed for summing per-sample vectors). Empty input
    sums to zero.
    """
    a = np.asarray(values, dtype=np.float64)
    if a.ndim == 0:
        raise ValueError("deterministic_sum expects at least a 1-D input")
    a = np.moveaxis(a, axis, 0)
    if a.shape[0] == 0:
        out = np.zeros(a.shape[1:], dtype=np.float64)
        return float(out) if out.ndim == 0 else out
    while a.shape[0] > 1:
        odd = a.shape[0] % 2 == 1
        tail = a[-1:] if odd else None
        body = a[:-1] if odd else a
        a = body[0::2] + body[1::2]
        if tail is not None:
            a = np.concatenate([a, tail], axis=0)
    out = a[0]
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def deterministic_mean(values, axis: int = 0):
    """deterministic_sum / count along ``axis``; empty input is rejected."""
    a = np.asarray(values, dtype=np.float64)
    n = a.shape[axis] if a.ndim > 0 else 0
    if n == 0:
        raise ValueError("deterministic_mean of empty input")
    return deterministic_sum(a, axis=axis) / n
