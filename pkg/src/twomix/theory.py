"""Numerical audits of the population landscape and finite-sample stability.

Four families of checks, each returning a small JSON-serializable report:

* homogeneity — on a grid of radii the largest relevant Hessian eigenvalue
  should grow like ``||theta||^alpha`` and the gradient norm should dominate
  ``(f - f*)^(1 - 1/(alpha+2))``.  The constants in those bounds are
  existential, so the pass criterion only demands that the observed ratios
  stay finite, positive, and within a bounded factor of each other across
  the audited grid.
* pseudo-convexity — ``f_bar(theta) - f_bar(0) <= <grad f_bar(theta), theta>``
  at random points of a ball, evaluated in one vectorized batch.
* stability — the sup over probe points of ``||grad_f_n - population grad||``
  should shrink like ``n^(-1/2)`` in the sample size and scale roughly
  linearly in the probe radius.
* gradcheck — analytic gradients of the three profiled sample objectives
  against central finite differences at random feasible points.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import diagonal as dg
from . import general as gn
from . import isotropic as iso
from .core import TruthSpec
from .quadrature import QuadratureRule
from .sampling import sample_gaussian

__all__ = [
    "HomogeneityReport",
    "PseudoConvexityReport",
    "StabilityReport",
    "GradCheckReport",
    "check_homogeneity_isotropic",
    "check_homogeneity_diagonal",
    "check_pseudo_convexity",
    "check_stability_scaling",
    "gradcheck",
    "report_to_json",
    "RATIO_SPREAD_MAX",
    "OBJECTIVES",
]

# "a universal constant exists" is audited as: the empirical ratio varies by
# at most this factor across the grid.  Tunable; generous on purpose.
RATIO_SPREAD_MAX = 50.0

OBJECTIVES = ("isotropic", "diagonal", "general")

_INVARIANCE_TOL = 1e-10
_OFF_AXIS_TOL = 1e-12


# ---------------------------------------------------------------------------
# reports


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class HomogeneityReport:
    """Extreme Hessian-growth and gradient-domination ratios over a radius grid."""

    alpha: float
    grid: np.ndarray
    hessian_ratio_max: float
    pl_ratio_min: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "grid": _jsonable(self.grid),
            "hessian_ratio_max": self.hessian_ratio_max,
            "pl_ratio_min": self.pl_ratio_min,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class PseudoConvexityReport:
    """Worst slack of <grad f_bar(theta), theta> - (f_bar(theta) - f_bar(0))."""

    trials: int
    radius: float
    worst_margin: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "radius": self.radius,
            "worst_margin": self.worst_margin,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class StabilityReport:
    """Monte Carlo scaling of sup ||grad_f_n - population grad|| over a ball."""

    gamma_claimed: float
    radius: float
    n_grid: tuple
    sup_dev: np.ndarray  # row = sample size, column = trial
    fitted_n_exponent: float
    fitted_r_exponent: float

    def to_dict(self) -> dict:
        return {
            "gamma_claimed": self.gamma_claimed,
            "radius": self.radius,
            "n_grid": _jsonable(self.n_grid),
            "sup_dev": _jsonable(self.sup_dev),
            "fitted_n_exponent": self.fitted_n_exponent,
            "fitted_r_exponent": self.fitted_r_exponent,
        }


@dataclass(frozen=True)
class GradCheckReport:
    """Worst relative disagreement between analytic and finite-difference gradients."""

    objective_id: str
    worst_rel_error: float
    step: float

    def to_dict(self) -> dict:
        return {
            "objective_id": self.objective_id,
            "worst_rel_error": self.worst_rel_error,
            "step": self.step,
        }


def report_to_json(report) -> str:
    """Serialize any report dataclass to a stable, human-readable JSON string."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# homogeneity


def _check_grid(grid, upper: float) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("grid must be a non-empty 1-D array of radii")
    if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
        raise ValueError("grid radii must be positive and finite")
    if float(g.max()) > upper + 1e-12:
        raise ValueError(f"grid radius {g.max():g} outside the audited region (max {upper:g})")
    return g


def _ratios_pass(hess_ratios: np.ndarray, pl_ratios: np.ndarray) -> bool:
    if not (np.all(np.isfinite(hess_ratios)) and np.all(np.isfinite(pl_ratios))):
        return False
    if float(pl_ratios.min()) <= 0.0 or float(hess_ratios.min()) <= 0.0:
        return False
    ok_h = float(hess_ratios.max()) <= RATIO_SPREAD_MAX * float(hess_ratios.min())
    ok_p = float(pl_ratios.max()) <= RATIO_SPREAD_MAX * float(pl_ratios.min())
    return ok_h and ok_p


def _objective_gap(f_value: float, f_star: float, radius: float) -> float:
    gap = f_value - f_star
    if gap <= 0.0:
        raise ValueError(
            f"objective increment at radius {radius:g} is below quadrature resolution"
        )
    return gap


def check_homogeneity_isotropic(
    d: int,
    alpha: float,
    grid=None,
    quad: QuadratureRule | None = None,
    n_directions: int = 32,
    seed: int = 0,
) -> HomogeneityReport:
    """Audit Hessian growth and gradient domination of the isotropic landscape.

    The flat regime near the truth has ``alpha = 6`` in one dimension and
    ``alpha = 2`` in two or more.  For d >= 2 each radius is probed along
    ``n_directions`` random directions and the values are required to agree
    to 1e-10 (the landscape depends on theta only through its norm).
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    quad = quad or iso.default_quad()
    if grid is None:
        grid = np.linspace(0.05, 0.4, 8)
    if d == 1:
        g = _check_grid(grid, 0.4)
    else:
        g = _check_grid(grid, 0.4 * np.sqrt(d))
        if float(g.max()) ** 2 >= d / 3.0:
            raise ValueError("grid outside the local convexity region ||theta||^2 < d/3")

    f_star = iso.population_f(np.zeros(d), quad=quad)
    pl_exp = 1.0 - 1.0 / (alpha + 2.0)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x484F4D)))

    hess_ratios = np.empty(g.shape[0])
    pl_ratios = np.empty(g.shape[0])
    for i, r in enumerate(g):
        if d == 1:
            lam_max = float(iso.population_hess_f(np.array([r]), quad=quad))
            f_val = iso.population_f(np.array([r]), quad=quad)
            grad_norm = float(np.linalg.norm(iso.population_grad_f(np.array([r]), quad=quad)))
        else:
            dirs = rng.standard_normal((n_directions, d))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            fs = np.empty(n_directions)
            gs = np.empty(n_directions)
            lams = np.empty(n_directions)
            for k, u in enumerate(dirs):
                theta = r * u
                fs[k] = iso.population_f(theta, quad=quad)
                gs[k] = float(np.linalg.norm(iso.population_grad_f(theta, quad=quad)))
                lams[k] = max(iso.population_hess_eigs(theta, quad=quad))
            for vals in (fs, gs, lams):
                if float(vals.max() - vals.min()) > _INVARIANCE_TOL:
                    raise RuntimeError(
                        "rotational invariance violated: values differ across directions"
                    )
            f_val, grad_norm, lam_max = float(fs[0]), float(gs[0]), float(lams[0])
        gap = _objective_gap(f_val, f_star, float(r))
        hess_ratios[i] = lam_max / float(r) ** alpha
        pl_ratios[i] = grad_norm / gap**pl_exp

    return HomogeneityReport(
        alpha=float(alpha),
        grid=g,
        hessian_ratio_max=float(hess_ratios.max()),
        pl_ratio_min=float(pl_ratios.min()),
        passed=_ratios_pass(hess_ratios, pl_ratios),
    )


def _fd_hessian_diag_model(theta: np.ndarray, quad, h: float) -> np.ndarray:
    """Central-difference Hessian of the diagonal population objective."""
    d = theta.shape[0]
    cols = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        gp = dg.population_grad_f_bar(theta + e, quad=quad)
        gm = dg.population_grad_f_bar(theta - e, quad=quad)
        cols[:, j] = (gp - gm) / (2.0 * h)
    return 0.5 * (cols + cols.T)


def _generic_direction(rng, d: int) -> np.ndarray:
    # all coordinates bounded away from zero: safely in the >= 2-nonzero regime
    floor = 0.15 / np.sqrt(d)
    while True:
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        if float(np.min(np.abs(u))) >= floor:
            return u


def check_homogeneity_diagonal(
    alpha_general: float = 2.0,
    alpha_axis: float = 6.0,
    grid=None,
    quad: QuadratureRule | None = None,
    d: int = 4,
    n_directions: int = 8,
    seed: int = 0,
    fd_step: float = 1e-5,
) -> tuple[HomogeneityReport, HomogeneityReport]:
    """Audit both curvature regimes of the diagonal-model landscape.

    Returns ``(generic, axis)`` reports.  Generic directions (every
    coordinate nonzero) see quadratic Hessian growth; along a coordinate
    axis the landscape collapses to the one-dimensional flat regime, so the
    axis report audits the curvature of the axis restriction with
    ``alpha_axis`` and additionally requires the off-axis gradient
    components to vanish to 1e-12.  The transverse curvature at an axis
    point grows like the generic exponent and is covered by the first
    report.
    """
    if d < 2:
        raise ValueError("the axis/generic distinction needs d >= 2")
    quad = quad or iso.default_quad()
    if grid is None:
        grid = np.linspace(0.05, 0.4, 8)
    g = _check_grid(grid, 0.4)

    f_star = dg.population_f_bar(np.zeros(d), quad=quad)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x444947)))

    # generic regime: random fully-nonzero directions at every radius
    pl_exp_gen = 1.0 - 1.0 / (alpha_general + 2.0)
    hess_gen = np.empty(g.shape[0] * n_directions)
    pl_gen = np.empty_like(hess_gen)
    k = 0
    for r in g:
        for _ in range(n_directions):
            theta = float(r) * _generic_direction(rng, d)
            lam_max = float(np.linalg.eigvalsh(_fd_hessian_diag_model(theta, quad, fd_step))[-1])
            gap = _objective_gap(dg.population_f_bar(theta, quad=quad), f_star, float(r))
            grad_norm = float(np.linalg.norm(dg.population_grad_f_bar(theta, quad=quad)))
            hess_gen[k] = lam_max / float(r) ** alpha_general
            pl_gen[k] = grad_norm / gap**pl_exp_gen
            k += 1
    generic = HomogeneityReport(
        alpha=float(alpha_general),
        grid=g,
        hessian_ratio_max=float(hess_gen.max()),
        pl_ratio_min=float(pl_gen.min()),
        passed=_ratios_pass(hess_gen, pl_gen),
    )

    # axis regime: curvature of the restriction to the first coordinate axis
    pl_exp_axis = 1.0 - 1.0 / (alpha_axis + 2.0)
    hess_ax = np.empty(g.shape[0])
    pl_ax = np.empty_like(hess_ax)
    off_axis_ok = True
    for i, r in enumerate(g):
        theta = np.zeros(d)
        theta[0] = float(r)
        grad = dg.population_grad_f_bar(theta, quad=quad)
        if float(np.max(np.abs(grad[1:]))) > _OFF_AXIS_TOL:
            off_axis_ok = False
        axis_curv = float(_fd_hessian_diag_model(theta, quad, fd_step)[0, 0])
        gap = _objective_gap(dg.population_f_bar(theta, quad=quad), f_star, float(r))
        hess_ax[i] = axis_curv / float(r) ** alpha_axis
        pl_ax[i] = float(np.linalg.norm(grad)) / gap**pl_exp_axis
    axis = HomogeneityReport(
        alpha=float(alpha_axis),
        grid=g,
        hessian_ratio_max=float(hess_ax.max()),
        pl_ratio_min=float(pl_ax.min()),
        passed=off_axis_ok and _ratios_pass(hess_ax, pl_ax),
    )
    return generic, axis


# ---------------------------------------------------------------------------
# pseudo-convexity


def check_pseudo_convexity(
    trials: int,
    radius: float = 0.3,
    quad: QuadratureRule | None = None,
    d: int = 4,
    seed: int = 0,
    slack: float = -1e-10,
) -> PseudoConvexityReport:
    """First-order lower bound f_bar(theta) - f_bar(0) <= <grad, theta> on a ball.

    Samples ``trials`` points uniformly in the ball of the given radius and
    evaluates both sides in one vectorized batch; passes when the inequality
    holds with margin >= ``slack`` everywhere.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if radius <= 0.0 or radius > 0.3:
        raise ValueError("radius must be in (0, 0.3]")
    quad = quad or iso.default_quad()
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x505345)))
    u = rng.standard_normal((trials, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    radii = radius * rng.random(trials) ** (1.0 / d)
    thetas = radii[:, None] * u

    f_star = dg.population_f_bar(np.zeros(d), quad=quad)
    f_vals = dg.population_f_bar_batch(thetas, quad=quad)
    grads = dg.population_grad_f_bar_batch(thetas, quad=quad)
    margins = np.einsum("ij,ij->i", grads, thetas) - (f_vals - f_star)
    worst = float(margins.min())
    return PseudoConvexityReport(
        trials=trials, radius=radius, worst_margin=worst, passed=worst >= slack
    )


# ---------------------------------------------------------------------------
# stability of the sample gradient


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _stability_probes(rng, probe_count: int, d: int, radius: float) -> np.ndarray:
    """Half the probes on the sphere of the given radius, half strictly inside."""
    u = rng.standard_normal((probe_count, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    radii = np.full(probe_count, radius)
    interior = np.arange(probe_count) >= probe_count // 2
    radii[interior] = radius * rng.random(int(interior.sum())) ** (1.0 / d)
    return radii[:, None] * u


def check_stability_scaling(
    d: int,
    radius: float = 0.3,
    n_grid=(1000, 3000, 10000, 30000, 100000),
    trials: int = 20,
    probe_count: int = 64,
    quad: QuadratureRule | None = None,
    seed: int = 0,
    r_grid=None,
    gamma_claimed: float = 1.0,
) -> StabilityReport:
    """Monte Carlo estimate of how sup ||grad_f_n - grad f|| scales in n and r.

    For every sample size and trial a fresh dataset is drawn and the
    deviation is maximized over a fixed probe set (half sphere, half
    interior) — a lower bound on the true sup, adequate for exponents.  The
    radius sweep reuses the largest-n datasets with the probe set rescaled.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if probe_count < 2:
        raise ValueError("probe_count must be at least 2")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    ns = tuple(int(n) for n in n_grid)
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_grid must be strictly increasing with at least two entries")
    if r_grid is None:
        r_grid = np.linspace(0.05, 0.4, 8)
    rs = np.asarray(r_grid, dtype=np.float64)
    if rs.ndim != 1 or rs.size < 2 or np.any(rs <= 0.0) or np.any(np.diff(rs) <= 0.0):
        raise ValueError("r_grid must be strictly increasing and positive")

    quad = quad or iso.default_quad()
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x535441)))
    probes = _stability_probes(rng, probe_count, d, radius)
    unit_probes = probes / radius

    # population gradients are dataset-independent: precompute per probe set
    pop_main = np.array([iso.population_grad_f(p, quad=quad) for p in probes])
    pop_by_r = {
        float(r): np.array([iso.population_grad_f(p, quad=quad) for p in unit_probes * r])
        for r in rs
    }

    truth = TruthSpec(theta_star=np.zeros(d), sigma_star2=1.0)
    sup_dev = np.empty((len(ns), trials))
    r_sup = np.empty((rs.size, trials))

    def _sup(data, cache, pts, pop):
        devs = [
            np.linalg.norm(iso.grad_f_n(p, data, cache) - pop[i]) for i, p in enumerate(pts)
        ]
        return float(np.max(devs))

    for i, n in enumerate(ns):
        for t in range(trials):
            child = int(np.random.SeedSequence((seed, n, t)).generate_state(1)[0])
            data = sample_gaussian(n, d, truth, child)
            cache = iso.MomentCache.from_data(data)
            sup_dev[i, t] = _sup(data, cache, probes, pop_main)
            if n == ns[-1]:
                for j, r in enumerate(rs):
                    r_sup[j, t] = _sup(data, cache, unit_probes * r, pop_by_r[float(r)])

    n_exp = _loglog_slope(ns, np.median(sup_dev, axis=1))
    r_exp = _loglog_slope(rs, np.median(r_sup, axis=1))
    return StabilityReport(
        gamma_claimed=float(gamma_claimed),
        radius=float(radius),
        n_grid=ns,
        sup_dev=sup_dev,
        fitted_n_exponent=n_exp,
        fitted_r_exponent=r_exp,
    )


# ---------------------------------------------------------------------------
# gradient correctness


def _fd_gradient(func, x: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (func(x + e) - func(x - e)) / (2.0 * h)
    return g


def gradcheck(
    objective_id: str,
    trials: int = 20,
    h: float = 1e-5,
    seed: int = 0,
    d: int | None = None,
    n: int = 400,
) -> GradCheckReport:
    """Validate an analytic sample-objective gradient against central differences.

    ``objective_id`` is one of "isotropic", "diagonal", "general".  The
    isotropic check covers d in {1, 4} unless ``d`` is given; the others
    default to d = 4.  Points are drawn at radii in [0.05, 0.6], away from
    the stationary origin and inside the profiled-variance feasible region.
    The default step balances truncation against roundoff: the landscape is
    so flat near the origin that gradients can be ~1e-4, and a smaller step
    would push the roundoff noise to the same order.
    """
    if objective_id not in OBJECTIVES:
        raise ValueError(f"unknown objective_id {objective_id!r}")
    if not (1e-8 <= h <= 1e-4):
        raise ValueError("step h must lie in [1e-8, 1e-4]")
    if trials < 1:
        raise ValueError("trials must be at least 1")

    dims = (d,) if d is not None else ((1, 4) if objective_id == "isotropic" else (4,))
    worst = 0.0
    for dim in dims:
        data_seed = int(np.random.SeedSequence((seed, dim, 0x474443)).generate_state(1)[0])
        data = sample_gaussian(n, dim, TruthSpec(np.zeros(dim), 1.0), data_seed)
        rng = np.random.default_rng(np.random.SeedSequence((seed, dim, 0x505453)))

        if objective_id == "isotropic":
            cache = iso.MomentCache.from_data(data)
            value = lambda th: iso.f_n(th, data, cache)
            grad = lambda th: iso.grad_f_n(th, data, cache)
            width = dim
        elif objective_id == "diagonal":
            cache = dg.DiagonalMomentCache.from_data(data)
            value = lambda th: dg.f_bar_n(th, data, cache)
            grad = lambda th: dg.grad_f_bar_n(th, data, cache)
            width = dim
        else:
            cache = gn.GeneralMomentCache.from_data(data)
            value = lambda v: gn.f_tilde_n(v[:dim], v[dim:], data, cache)
            grad = lambda v: np.concatenate(gn.grad_f_tilde_n(v[:dim], v[dim:], data, cache))
            width = 2 * dim

        for _ in range(trials):
            u = rng.standard_normal(width)
            u /= np.linalg.norm(u)
            x = (0.05 + 0.55 * rng.random()) * u
            g = np.asarray(grad(x), dtype=np.float64)
            g_fd = _fd_gradient(value, x, h)
            rel = float(np.linalg.norm(g_fd - g) / max(np.linalg.norm(g), 1e-10))
            worst = max(worst, rel)

    return GradCheckReport(objective_id=objective_id, worst_rel_error=worst, step=float(h))
