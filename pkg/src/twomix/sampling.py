"""Synthetic data generation and deterministic train/validation splitting.

All randomness flows through Philox, a counter-based generator, so every
sample is a pure function of (seed, position): regenerating a dataset with
the same seed is bit-identical, and independent trials cannot interact no
matter how they are scheduled. Normal variates are produced by inverse-CDF
transform of bin-center uniforms, which keeps the (seed, index) -> value map
explicit (one uniform per entry, no rejection loops).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .core import TruthSpec, seed_entropy

__all__ = [
    "Dataset",
    "SplitDataset",
    "sample_gaussian",
    "sample_symmetric_mixture",
    "split_train_val",
    "save_dataset_csv",
    "load_dataset_csv",
]

def _philox(seed_material) -> np.random.Generator:
    material = seed_entropy(seed_material)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(material)))


def _uniform_open(rng: np.random.Generator, shape) -> np.ndarray:
    # bin-center uniforms: (k + 0.5) * 2^-53 lies strictly inside (0, 1)
    k = rng.integers(0, 1 << 53, size=shape, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n-by-d sample matrix plus the provenance needed to regenerate it."""

    samples: np.ndarray
    n: int
    d: int
    seed: int
    truth: TruthSpec

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        if s.ndim != 2:
            raise ValueError("samples must be 2-D (n rows, d columns)")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "seed", int(self.seed))
        if s.shape != (self.n, self.d):
            raise ValueError(f"samples shape {s.shape} does not match (n, d)=({self.n}, {self.d})")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be at least 1")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        if self.truth.d != self.d:
            raise ValueError("truth dimension does not match d")


@dataclass(frozen=True, eq=False)
class SplitDataset:
    train: Dataset
    val: Dataset | None


def sample_gaussian(n: int, d: int, truth: TruthSpec, seed: int) -> Dataset:
    """n i.i.d. draws from N(theta_star, sigma_star2 * I_d)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    if truth.d != d:
        raise ValueError("truth dimension does not match d")
    rng = _philox(seed)
    z = ndtri(_uniform_open(rng, (n, d)))
    samples = truth.theta_star + np.sqrt(truth.sigma_star2) * z
    return Dataset(samples=samples, n=n, d=d, seed=seed, truth=truth)


def sample_symmetric_mixture(n: int, d: int, truth: TruthSpec, seed: int) -> Dataset:
    """n i.i.d. draws from 0.5*N(-theta_star, sigma_star2*I) + 0.5*N(theta_star, sigma_star2*I).

    Consumes the stream in a fixed order: the n-by-d normal block first, then
    n sign uniforms.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    if truth.d != d:
        raise ValueError("truth dimension does not match d")
    rng = _philox(seed)
    z = ndtri(_uniform_open(rng, (n, d)))
    signs = np.where(_uniform_open(rng, n) < 0.5, -1.0, 1.0)
    samples = signs[:, None] * truth.theta_star + np.sqrt(truth.sigma_star2) * z
    return Dataset(samples=samples, n=n, d=d, seed=seed, truth=truth)


def split_train_val(data: Dataset, val_fraction: float, seed: int) -> SplitDataset:
    """Disjoint shuffled split; val gets floor(n * val_fraction) rows.

    The permutation depends only on ``seed`` (not on the data), and indices
    within each part are re-sorted so each part preserves original row order.
    val_fraction = 0 returns the whole dataset as train and val = None.
    """
    vf = float(val_fraction)
    if not 0.0 <= vf < 1.0:
        raise ValueError("val_fraction must lie in [0, 1)")
    if vf == 0.0:
        return SplitDataset(train=data, val=None)
    n_val = int(np.floor(data.n * vf))
    if n_val < 1:
        raise ValueError("val_fraction too small: floor(n * val_fraction) must be >= 1")
    perm = _philox((seed, 0x53504C)).permutation(data.n)
    val_idx = np.sort(perm[:n_val])
    train_idx = np.sort(perm[n_val:])

    def _sub(idx):
        return Dataset(
            samples=data.samples[idx],
            n=idx.shape[0],
            d=data.d,
            seed=data.seed,
            truth=data.truth,
        )

    return SplitDataset(train=_sub(train_idx), val=_sub(val_idx))


_HEADER_RE = re.compile(
    r"^# d=(\d+) n=(\d+) seed=(-?\d+) theta_star=([^ ]+) sigma_star2=([^ ]+)$"
)


def save_dataset_csv(data: Dataset, path) -> None:
    """Write the header line then one row of 17-significant-digit fields per sample."""
    theta = ",".join(f"{v:.17g}" for v in data.truth.theta_star)
    header = (
        f"# d={data.d} n={data.n} seed={data.seed} "
        f"theta_star={theta} sigma_star2={data.truth.sigma_star2:.17g}"
    )
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in data.samples:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_dataset_csv(path) -> Dataset:
    """Inverse of save_dataset_csv; round-trips float64 values exactly."""
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        m = _HEADER_RE.match(first)
        if m is None:
            raise ValueError(f"malformed dataset header: {first!r}")
        d, n, seed = int(m.group(1)), int(m.group(2)), int(m.group(3))
        theta_star = np.array([float(v) for v in m.group(4).split(",")])
        truth = TruthSpec(theta_star=theta_star, sigma_star2=float(m.group(5)))
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.shape != (n, d):
        raise ValueError(f"dataset body shape {body.shape} does not match header ({n}, {d})")
    return Dataset(samples=body, n=n, d=d, seed=seed, truth=truth)
