"""Gauss-Hermite quadrature in probabilists' normalization.

Expectations of the population objectives are one-dimensional integrals
against the standard normal density. Physicists' Gauss-Hermite nodes (x, w)
are rescaled to z = sqrt(2) x, w / sqrt(pi) so that sum(w) = 1 and the rule
integrates polynomials against N(0, 1) exactly up to degree 2*order - 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss

__all__ = ["QuadratureRule", "gauss_hermite"]

DEFAULT_ORDER = 64


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights approximating E[g(V)], V ~ N(0,1), by sum(w * g(z))."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int = field(default=0)

    def __post_init__(self):
        z = np.asarray(self.nodes, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if z.ndim != 1 or w.shape != z.shape:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        object.__setattr__(self, "nodes", z)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "order", int(self.order) or z.shape[0])
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        if abs((w * z * z).sum() - 1.0) > 1e-10:
            raise ValueError("rule must integrate z^2 to 1 within 1e-10")

    def expect(self, g) -> float:
        """E[g(V)] for a vectorized callable g."""
        return float(np.dot(self.weights, g(self.nodes)))


def gauss_hermite(order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Probabilists' Gauss-Hermite rule of the given order (>= 2)."""
    if order < 2:
        raise ValueError("order must be at least 2")
    x, w = hermgauss(order)
    return QuadratureRule(nodes=np.sqrt(2.0) * x, weights=w / np.sqrt(np.pi), order=order)
