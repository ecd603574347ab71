"""Finite-difference oracles shared across test modules.

The population landscape is extremely flat near the origin (the objective
gap and gradient live 4-6 orders of magnitude below the objective value),
so plain central differences bottom out near 1e-7 relative error there.
Richardson extrapolation of central slopes in powers of h^2 removes the
truncation series while keeping h large enough to dodge cancellation,
reaching ~1e-9 relative error even on the flat d=1 landscape.
"""
import numpy as np


def central_diff_gradient(f, x, h):
    """Plain second-order central differences, one coordinate at a time."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def richardson_gradient(f, x, h0=0.02, levels=4):
    """Richardson-extrapolated central differences (error O(h0^(2*levels)))."""
    x = np.asarray(x, dtype=np.float64)
    hs = h0 / 2.0 ** np.arange(levels)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        slopes = []
        for h in hs:
            e[j] = h
            slopes.append((f(x + e) - f(x - e)) / (2.0 * h))
        # slope(h) = g_j + c1 h^2 + c2 h^4 + ...; read off the h -> 0 limit
        coeffs = np.polynomial.polynomial.polyfit(hs**2, slopes, levels - 1)
        g[j] = coeffs[0]
    return g


def central_diff_second(f, x, h):
    """Second derivative of a scalar function of one variable."""
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / h**2
