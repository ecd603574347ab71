"""EM and exponential-step-size location-update (ELU) solvers.

Both algorithms share the same outer loop: split the data, iterate a
single-step update, record train/validation objectives (and errors against
the truth when available) at every iterate, and select the best iterate by
minimum validation negative log-likelihood. ELU moves the location(s) by
gradient descent on the profiled objective with step multiplier eta/beta^t
(t counting from 0) and re-profiles the scale in closed form; its iterates
are expected to diverge after passing the optimum, which the loop records as
a terminated_reason instead of raising.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import diagonal as dg
from . import general as gn
from . import isotropic as iso
from .core import (
    DegenerateComponentError,
    DiagonalParams,
    FitError,
    GeneralParams,
    InfeasibleIterateError,
    IsotropicParams,
    NonFiniteIterateError,
    TruthSpec,
    deterministic_mean,
    location_error_symmetric,
    seed_entropy,
)
from .sampling import Dataset, split_train_val

__all__ = [
    "SolverConfig",
    "FitTrace",
    "DiagnoseReport",
    "step_multiplier",
    "em_step_isotropic",
    "elu_step_isotropic",
    "em_step_diagonal",
    "elu_step_diagonal",
    "em_step_general",
    "elu_step_general",
    "default_init",
    "fit",
    "diagnose",
    "schedule_conditions",
    "warn_on_schedule_conditions",
    "MODELS",
    "ALGORITHMS",
    "REASON_COMPLETED",
    "REASON_INFEASIBLE",
    "REASON_NONFINITE",
]

MODELS = ("isotropic", "diagonal", "general")
ALGORITHMS = ("em", "elu")

REASON_COMPLETED = "completed"
REASON_INFEASIBLE = "infeasible_iterate"
REASON_NONFINITE = "nonfinite"


@dataclass(frozen=True)
class SolverConfig:
    eta: float
    beta: float
    max_iters: int
    val_fraction: float = 0.1
    seed: int = 0
    record_truth_errors: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError("eta must be positive")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")


def step_multiplier(eta: float, beta: float, t: int) -> float:
    """Multiplier eta * beta^(-t) applied to the gradient at iteration t (t >= 0)."""
    if t < 0:
        raise ValueError("iteration index must be >= 0")
    return eta * beta ** (-t)


@dataclass(eq=False)
class FitTrace:
    """Per-iteration history of a single fit.

    Record 0 is the initialization; record k is the iterate after k steps.
    best_index is the argmin of the validation objective (train objective
    when there is no validation split), ties resolved to the earliest.
    """

    iterates: list
    train_objective: np.ndarray
    val_objective: np.ndarray | None
    err_location: np.ndarray | None
    err_scale: np.ndarray | None
    best_index: int
    terminated_reason: str

    def __len__(self) -> int:
        return len(self.iterates)

    @property
    def best_params(self):
        return self.iterates[self.best_index]


# ---------------------------------------------------------------------------
# single-step updates


def em_step_isotropic(
    params: IsotropicParams, data: Dataset, cache: iso.MomentCache | None = None
) -> IsotropicParams:
    """One EM iteration: location step at the current scale, then exact scale step."""
    cache = cache or iso.MomentCache.from_data(data)
    tau = np.tanh(data.samples @ params.theta / params.sigma2)
    theta_next = deterministic_mean(data.samples * tau[:, None], axis=0)
    sigma2_next = cache.a_n - (theta_next @ theta_next) / cache.d
    if not sigma2_next > 0.0:
        raise InfeasibleIterateError("EM scale update produced sigma2 <= 0")
    return IsotropicParams(theta=theta_next, sigma2=sigma2_next)


def elu_step_isotropic(
    theta, t: int, config: SolverConfig, data: Dataset, cache: iso.MomentCache | None = None
) -> tuple[np.ndarray, float]:
    """One ELU iteration on the isotropic profiled objective."""
    cache = cache or iso.MomentCache.from_data(data)
    g = iso.grad_f_n(theta, data, cache)
    if not np.all(np.isfinite(g)):
        raise NonFiniteIterateError("gradient is not finite")
    theta_next = np.asarray(theta, dtype=np.float64) - step_multiplier(
        config.eta, config.beta, t
    ) * g
    if not np.all(np.isfinite(theta_next)):
        raise NonFiniteIterateError("location iterate is not finite")
    sigma2_next = iso.moment_sigma2(theta_next, cache)
    return theta_next, sigma2_next


def em_step_diagonal(
    params: DiagonalParams, data: Dataset, cache: dg.DiagonalMomentCache | None = None
) -> DiagonalParams:
    cache = cache or dg.DiagonalMomentCache.from_data(data)
    tau = np.tanh(data.samples @ (params.theta / params.sigma2))
    theta_next = deterministic_mean(data.samples * tau[:, None], axis=0)
    sigma2_next = cache.m2 - theta_next**2
    if np.any(sigma2_next <= 0.0):
        raise InfeasibleIterateError("EM scale update produced a nonpositive variance")
    return DiagonalParams(theta=theta_next, sigma2=sigma2_next)


def elu_step_diagonal(
    theta, t: int, config: SolverConfig, data: Dataset, cache: dg.DiagonalMomentCache | None = None
) -> tuple[np.ndarray, np.ndarray]:
    cache = cache or dg.DiagonalMomentCache.from_data(data)
    g = dg.grad_f_bar_n(theta, data, cache)
    if not np.all(np.isfinite(g)):
        raise NonFiniteIterateError("gradient is not finite")
    theta_next = np.asarray(theta, dtype=np.float64) - step_multiplier(
        config.eta, config.beta, t
    ) * g
    if not np.all(np.isfinite(theta_next)):
        raise NonFiniteIterateError("location iterate is not finite")
    sigma2_next = dg.profile_sigma2_diag(theta_next, cache)
    return theta_next, sigma2_next


def em_step_general(
    params: GeneralParams, data: Dataset, cache: gn.GeneralMomentCache | None = None
) -> GeneralParams:
    """One EM iteration with responsibilities at the current parameters."""
    cache = cache or gn.GeneralMomentCache.from_data(data)
    X = data.samples
    w2 = gn._resp_rows(params.theta1, params.theta2, params.sigma2, X)
    w1 = 1.0 - w2
    p1 = deterministic_mean(w1)
    p2 = deterministic_mean(w2)
    if p1 == 0.0 or p2 == 0.0:
        raise DegenerateComponentError("a component's responsibility mass vanished")
    theta1_next = deterministic_mean(X * w1[:, None], axis=0) / p1
    theta2_next = deterministic_mean(X * w2[:, None], axis=0) / p2
    sigma2_next = cache.sum_sq - (
        (theta1_next @ theta1_next) * p1 + (theta2_next @ theta2_next) * p2
    ) / cache.d
    if not sigma2_next > 0.0:
        raise InfeasibleIterateError("EM scale update produced sigma2 <= 0")
    return GeneralParams(theta1=theta1_next, theta2=theta2_next, sigma2=sigma2_next)


def elu_step_general(
    theta1,
    theta2,
    t: int,
    config: SolverConfig,
    data: Dataset,
    cache: gn.GeneralMomentCache | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Simultaneous gradient step on both locations, then the closed-form scale."""
    cache = cache or gn.GeneralMomentCache.from_data(data)
    g1, g2 = gn.grad_f_tilde_n(theta1, theta2, data, cache)
    if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
        raise NonFiniteIterateError("gradient is not finite")
    mult = step_multiplier(config.eta, config.beta, t)
    t1_next = np.asarray(theta1, dtype=np.float64) - mult * g1
    t2_next = np.asarray(theta2, dtype=np.float64) - mult * g2
    if not (np.all(np.isfinite(t1_next)) and np.all(np.isfinite(t2_next))):
        raise NonFiniteIterateError("location iterate is not finite")
    sigma2_next = gn.profile_sigma2_general(t1_next, t2_next, cache)
    return t1_next, t2_next, sigma2_next


# ---------------------------------------------------------------------------
# initialization


def _unit_direction(d: int, seed_material) -> np.ndarray:
    material = seed_entropy(seed_material)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(material)))
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def default_init(model: str, data: Dataset, seed: int, radius: float = 0.5):
    """Location(s) uniform on the sphere of the given radius; scale profiled.

    theta = 0 is a stationary point of every update, so the default start is
    a random nonzero point well inside the feasible ball. The general model
    starts from an antipodal pair so the two locations never coincide (a
    coinciding pair is a fixed family of both algorithms).
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    u = _unit_direction(data.d, (seed, 0x494E49))
    theta0 = radius * u
    if model == "isotropic":
        cache = iso.MomentCache.from_data(data)
        return IsotropicParams(theta=theta0, sigma2=iso.moment_sigma2(theta0, cache))
    if model == "diagonal":
        cache = dg.DiagonalMomentCache.from_data(data)
        return DiagonalParams(theta=theta0, sigma2=dg.profile_sigma2_diag(theta0, cache))
    if model == "general":
        cache = gn.GeneralMomentCache.from_data(data)
        return GeneralParams(
            theta1=theta0,
            theta2=-theta0,
            sigma2=gn.profile_sigma2_general(theta0, -theta0, cache),
        )
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# the fitting loop


class _IsotropicDriver:
    def __init__(self, train, val):
        self.train, self.val = train, val
        self.cache = iso.MomentCache.from_data(train)
        self.val_cache = iso.MomentCache.from_data(val) if val is not None else None

    def start(self, init, algorithm):
        if algorithm == "elu":
            return IsotropicParams(
                theta=init.theta, sigma2=iso.moment_sigma2(init.theta, self.cache)
            )
        return init

    def step(self, params, k, algorithm, config):
        if algorithm == "em":
            return em_step_isotropic(params, self.train, self.cache)
        theta, s2 = elu_step_isotropic(params.theta, k - 1, config, self.train, self.cache)
        return IsotropicParams(theta=theta, sigma2=s2)

    def objectives(self, params):
        tr = iso.neg_loglik(params, self.train, self.cache)
        va = (
            iso.neg_loglik(params, self.val, self.val_cache)
            if self.val is not None
            else None
        )
        return tr, va

    def errors(self, params, truth):
        return (
            location_error_symmetric(params.theta, truth.theta_star),
            abs(params.sigma2 - truth.sigma_star2),
        )


class _DiagonalDriver(_IsotropicDriver):
    def __init__(self, train, val):
        self.train, self.val = train, val
        self.cache = dg.DiagonalMomentCache.from_data(train)
        self.val_cache = dg.DiagonalMomentCache.from_data(val) if val is not None else None

    def start(self, init, algorithm):
        if algorithm == "elu":
            return DiagonalParams(
                theta=init.theta, sigma2=dg.profile_sigma2_diag(init.theta, self.cache)
            )
        return init

    def step(self, params, k, algorithm, config):
        if algorithm == "em":
            return em_step_diagonal(params, self.train, self.cache)
        theta, s2 = elu_step_diagonal(params.theta, k - 1, config, self.train, self.cache)
        return DiagonalParams(theta=theta, sigma2=s2)

    def objectives(self, params):
        tr = dg.neg_loglik_diag(params, self.train, self.cache)
        va = (
            dg.neg_loglik_diag(params, self.val, self.val_cache)
            if self.val is not None
            else None
        )
        return tr, va

    def errors(self, params, truth):
        return (
            location_error_symmetric(params.theta, truth.theta_star),
            float(np.max(np.abs(params.sigma2 - truth.sigma_star2))),
        )


class _GeneralDriver(_IsotropicDriver):
    def __init__(self, train, val):
        self.train, self.val = train, val
        self.cache = gn.GeneralMomentCache.from_data(train)
        self.val_cache = gn.GeneralMomentCache.from_data(val) if val is not None else None

    def start(self, init, algorithm):
        if algorithm == "elu":
            return GeneralParams(
                theta1=init.theta1,
                theta2=init.theta2,
                sigma2=gn.profile_sigma2_general(init.theta1, init.theta2, self.cache),
            )
        return init

    def step(self, params, k, algorithm, config):
        if algorithm == "em":
            return em_step_general(params, self.train, self.cache)
        t1, t2, s2 = elu_step_general(
            params.theta1, params.theta2, k - 1, config, self.train, self.cache
        )
        return GeneralParams(theta1=t1, theta2=t2, sigma2=s2)

    def objectives(self, params):
        tr = gn.neg_loglik_general(params, self.train, self.cache)
        va = (
            gn.neg_loglik_general(params, self.val, self.val_cache)
            if self.val is not None
            else None
        )
        return tr, va

    def errors(self, params, truth):
        # location part of the mixing-measure transport distance
        el = 0.5 * (
            np.linalg.norm(params.theta1 - truth.theta_star)
            + np.linalg.norm(params.theta2 - truth.theta_star)
        )
        return float(el), abs(params.sigma2 - truth.sigma_star2)


_DRIVERS = {
    "isotropic": _IsotropicDriver,
    "diagonal": _DiagonalDriver,
    "general": _GeneralDriver,
}


def fit(
    algorithm: str,
    model: str,
    data: Dataset,
    init,
    config: SolverConfig,
    truth: TruthSpec | None = None,
) -> FitTrace:
    """Run one algorithm on one dataset and return the full iterate history.

    Step-level infeasibility or non-finiteness ends the loop with a partial
    trace and the matching terminated_reason; an infeasible *init* raises.
    """
    algorithm = algorithm.lower()
    model = model.lower()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")

    split = split_train_val(data, config.val_fraction, config.seed)
    driver = _DRIVERS[model](split.train, split.val)

    record_errors = config.record_truth_errors and truth is not None
    params = driver.start(init, algorithm)

    iterates = [params]
    train_obj: list[float] = []
    val_obj: list[float] = []
    err_loc: list[float] = []
    err_scale: list[float] = []
    reason = REASON_COMPLETED

    def _record(p) -> bool:
        tr, va = driver.objectives(p)
        ok = np.isfinite(tr) and (va is None or np.isfinite(va))
        if not ok:
            return False
        train_obj.append(float(tr))
        if va is not None:
            val_obj.append(float(va))
        if record_errors:
            el, es = driver.errors(p, truth)
            err_loc.append(el)
            err_scale.append(es)
        return True

    if not _record(params):
        raise NonFiniteIterateError("objective not finite at the initial point")

    for k in range(1, config.max_iters + 1):
        try:
            params = driver.step(params, k, algorithm, config)
        except InfeasibleIterateError:
            reason = REASON_INFEASIBLE
            break
        except NonFiniteIterateError:
            reason = REASON_NONFINITE
            break
        except DegenerateComponentError:
            reason = REASON_INFEASIBLE
            break
        if not _record(params):
            reason = REASON_NONFINITE
            break
        iterates.append(params)

    selector = np.asarray(val_obj if val_obj else train_obj)
    best_index = int(np.argmin(selector))
    return FitTrace(
        iterates=iterates,
        train_objective=np.asarray(train_obj),
        val_objective=np.asarray(val_obj) if val_obj else None,
        err_location=np.asarray(err_loc) if record_errors else None,
        err_scale=np.asarray(err_scale) if record_errors else None,
        best_index=best_index,
        terminated_reason=reason,
    )


# ---------------------------------------------------------------------------
# regime diagnostic


@dataclass(frozen=True)
class DiagnoseReport:
    regime: str
    em_rate: float
    elu_best_err: float


def diagnose(
    data: Dataset,
    config: SolverConfig,
    init=None,
    k_iters: int = 50,
    decay_threshold: float = 0.9,
) -> DiagnoseReport:
    """Run EM and ELU side by side and classify the data regime.

    The classifier fits a geometric decay factor to EM's training-objective
    gap over the first k_iters iterations: fast (geometric) decay indicates a
    well-separated, exactly-specified-like mixture; a factor near 1 indicates
    the flat over-specified landscape. The initialization radius scales with
    the pooled second moment so a strong mixture signal is not washed out by
    a large pooled variance.
    """
    if k_iters < 1:
        raise ValueError("k_iters must be at least 1 (no iterations to classify)")
    if init is None:
        a_n = iso.MomentCache.from_data(data).a_n
        init = default_init("isotropic", data, config.seed, radius=0.5 * np.sqrt(a_n))
    em_trace = fit(
        "em", "isotropic", data, init, replace(config, max_iters=k_iters), truth=None
    )
    elu_trace = fit("elu", "isotropic", data, init, config, truth=None)

    obj = em_trace.train_objective
    gaps = obj[:-1] - obj[-1]
    t_idx = np.arange(gaps.shape[0], dtype=np.float64)
    scale = max(1.0, abs(float(obj[-1])))
    keep = gaps > 1e-13 * scale
    if keep.sum() >= 3:
        slope = np.polyfit(t_idx[keep], np.log(gaps[keep]), 1)[0]
        em_rate = float(np.exp(slope))
    else:
        # objective flat from the start: EM converged essentially immediately
        em_rate = 0.0

    regime = "exactly_specified_like" if em_rate < decay_threshold else "over_specified_like"
    best_vals = (
        elu_trace.val_objective if elu_trace.val_objective is not None else elu_trace.train_objective
    )
    return DiagnoseReport(
        regime=regime,
        em_rate=em_rate,
        elu_best_err=float(best_vals[elu_trace.best_index]),
    )


# ---------------------------------------------------------------------------
# advisory step-schedule check


def schedule_conditions(
    eta: float, beta: float, init_norm: float, alpha: float, c1: float
) -> tuple[bool, bool]:
    """Evaluate the two sufficient (eta, beta) conditions for a given curvature constant.

    Condition 1: eta*c1*r^alpha*beta/((alpha+1)(alpha+2)) + beta^(2/alpha) >= 1.
    Condition 2: eta*c1*(alpha+2)*3^alpha*r^alpha <= alpha+1, with r the
    initialization radius. The curvature constant c1 is problem-dependent and
    must be supplied by the caller.
    """
    if alpha <= 0 or c1 <= 0 or init_norm <= 0:
        raise ValueError("alpha, c1, and init_norm must be positive")
    r_alpha = init_norm**alpha
    cond1 = eta * c1 * r_alpha * beta / ((alpha + 1.0) * (alpha + 2.0)) + beta ** (2.0 / alpha) >= 1.0
    cond2 = eta * c1 * (alpha + 2.0) * 3.0**alpha * r_alpha <= alpha + 1.0
    return bool(cond1), bool(cond2)


def warn_on_schedule_conditions(
    config: SolverConfig, init_norm: float, alpha: float, c1: float
) -> tuple[bool, bool]:
    """Advisory validator: warns (never errors) when a schedule condition fails."""
    cond1, cond2 = schedule_conditions(config.eta, config.beta, init_norm, alpha, c1)
    if not cond1:
        warnings.warn(
            "step schedule condition 1 (growth/contraction balance) not satisfied "
            f"for eta={config.eta}, beta={config.beta}, c1={c1}",
            stacklevel=2,
        )
    if not cond2:
        warnings.warn(
            "step schedule condition 2 (initial step bound) not satisfied "
            f"for eta={config.eta}, beta={config.beta}, c1={c1}",
            stacklevel=2,
        )
    return cond1, cond2
