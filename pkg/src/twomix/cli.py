"""Command-line interface.

Subcommands: ``gen`` (synthetic datasets), ``fit`` (one algorithm on one
dataset with an optional per-iteration trace), ``sweep`` (statistical-radius
sweep from a JSON spec), ``iters`` (iteration-complexity scaling), ``figure``
(side-by-side EM/ELU trace CSV), ``check`` (landscape / stability / gradient
audits), and ``diagnose`` (regime classification for a dataset).

Exit codes: 0 on success, 2 on validation errors (bad arguments, malformed
specs or data), 3 on runtime failures.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import FitError, TruthSpec
from .harness import (
    SweepSpec,
    run_figure,
    run_iteration_scaling,
    run_sweep,
    save_figure_csv,
    save_sweep_csv,
    save_trace_csv,
)
from .sampling import load_dataset_csv, sample_gaussian, sample_symmetric_mixture, save_dataset_csv
from .solvers import ALGORITHMS, MODELS, SolverConfig, default_init, diagnose, fit
from .theory import (
    check_homogeneity_diagonal,
    check_homogeneity_isotropic,
    check_pseudo_convexity,
    check_stability_scaling,
    gradcheck,
)

GRADCHECK_TOL = 1e-6
# expected scaling windows for the stability exponents
N_EXPONENT_WINDOW = (-0.6, -0.4)
R_EXPONENT_WINDOW = (0.8, 1.3)

CHECK_NAMES = ("homog-iso", "homog-diag", "pseudo-convex", "stability", "gradcheck")


def _write_json(payload, path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _parse_theta_star(text: str | None, d: int) -> np.ndarray:
    if text is None:
        return np.zeros(d)
    values = np.array([float(v) for v in text.split(",")], dtype=np.float64)
    if values.shape[0] != d:
        raise ValueError(f"theta-star has {values.shape[0]} entries but d={d}")
    return values


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_gen(args) -> int:
    truth = TruthSpec(
        theta_star=_parse_theta_star(args.theta_star, args.d), sigma_star2=args.sigma2_star
    )
    sampler = sample_gaussian if args.model == "gaussian" else sample_symmetric_mixture
    data = sampler(args.n, args.d, truth, args.seed)
    save_dataset_csv(data, args.out)
    print(f"wrote {args.n} x {args.d} samples to {args.out}")
    return 0


def cmd_fit(args) -> int:
    data = load_dataset_csv(args.data)
    config = SolverConfig(
        eta=args.eta,
        beta=args.beta,
        max_iters=args.iters,
        val_fraction=args.val_frac,
        seed=args.seed,
    )
    init = default_init(args.model, data, args.seed)
    trace = fit(args.algo, args.model, data, init, config, truth=data.truth)
    if args.trace_out:
        save_trace_csv(trace, args.trace_out)
    b = trace.best_index
    summary = {
        "model": args.model,
        "algorithm": args.algo,
        "iterations": int(trace.train_objective.shape[0] - 1),
        "best_index": int(b),
        "terminated_reason": trace.terminated_reason,
        "best_train_obj": float(trace.train_objective[b]),
        "best_val_obj": (
            float(trace.val_objective[b]) if trace.val_objective is not None else None
        ),
        "best_err_location": (
            float(trace.err_location[b]) if trace.err_location is not None else None
        ),
        "best_err_scale": float(trace.err_scale[b]) if trace.err_scale is not None else None,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _load_spec(path) -> SweepSpec:
    with open(path) as fh:
        payload = json.load(fh)
    try:
        return SweepSpec.from_dict(payload)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed sweep spec: {exc}") from exc


def cmd_sweep(args) -> int:
    spec = _load_spec(args.spec)
    result = run_sweep(spec)
    save_sweep_csv(result, args.out)
    if args.summary_out:
        _write_json(result.summary_dict(), args.summary_out)
    loc = result.slope_location.slope if result.slope_location else None
    scale = result.slope_scale.slope if result.slope_scale else None
    print(f"rows={len(result.rows)} slope_location={loc} slope_scale={scale}")
    return 0


def cmd_iters(args) -> int:
    spec = _load_spec(args.spec)
    result = run_iteration_scaling(spec)
    _write_json(result.to_dict(), args.out)
    print(
        f"median_iters={result.median_iters_to_best} slope_vs_log_n={result.fit_slope}"
    )
    return 0


def cmd_figure(args) -> int:
    config = SolverConfig(
        eta=args.eta,
        beta=args.beta,
        max_iters=args.iters,
        val_fraction=args.val_frac,
        seed=args.seed,
    )
    rows = run_figure(args.model, args.d, args.n, config)
    save_figure_csv(rows, args.out)
    print(f"wrote {len(rows)} trace rows to {args.out}")
    return 0


def _in_window(value: float, window: tuple) -> bool:
    return window[0] < value < window[1]


def cmd_check(args) -> int:
    which = args.which
    if which == "homog-iso":
        d1 = check_homogeneity_isotropic(1, 6.0, seed=args.seed)
        d4 = check_homogeneity_isotropic(4, 2.0, seed=args.seed)
        payload = {
            "d1_alpha6": d1.to_dict(),
            "d4_alpha2": d4.to_dict(),
            "pass": d1.passed and d4.passed,
        }
    elif which == "homog-diag":
        generic, axis = check_homogeneity_diagonal(seed=args.seed)
        payload = {
            "generic": generic.to_dict(),
            "axis": axis.to_dict(),
            "pass": generic.passed and axis.passed,
        }
    elif which == "pseudo-convex":
        payload = check_pseudo_convexity(100000, 0.3, seed=args.seed).to_dict()
    elif which == "stability":
        d1 = check_stability_scaling(1, seed=args.seed)
        d4 = check_stability_scaling(4, seed=args.seed)
        ok = (
            _in_window(d1.fitted_n_exponent, N_EXPONENT_WINDOW)
            and _in_window(d4.fitted_n_exponent, N_EXPONENT_WINDOW)
            and _in_window(d4.fitted_r_exponent, R_EXPONENT_WINDOW)
        )
        payload = {"d1": d1.to_dict(), "d4": d4.to_dict(), "pass": ok}
    else:
        reports = {oid: gradcheck(oid, seed=args.seed) for oid in ("isotropic", "diagonal", "general")}
        payload = {oid: rep.to_dict() for oid, rep in reports.items()}
        payload["pass"] = all(rep.worst_rel_error < GRADCHECK_TOL for rep in reports.values())
    _write_json(payload, args.out)
    print(f"{which}: {'PASS' if payload.get('pass') else 'FAIL'}")
    return 0


def cmd_diagnose(args) -> int:
    data = load_dataset_csv(args.data)
    config = SolverConfig(
        eta=args.eta,
        beta=args.beta,
        max_iters=args.iters,
        val_fraction=args.val_frac,
        seed=args.seed,
    )
    report = diagnose(data, config)
    payload = {
        "regime": report.regime,
        "em_rate": report.em_rate,
        "elu_best_err": report.elu_best_err,
    }
    _write_json(payload, args.out)
    print(f"regime={report.regime} em_rate={report.em_rate:.4f}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_solver_flags(p, eta=0.01, beta=0.8, iters=200):
    p.add_argument("--eta", type=float, default=eta, help="base step size")
    p.add_argument("--beta", type=float, default=beta, help="step decay base in (0, 1]")
    p.add_argument("--iters", type=int, default=iters, help="maximum iterations")
    p.add_argument("--val-frac", type=float, default=0.1, dest="val_frac")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twomix",
        description="Benchmarks and landscape checks for over-specified two-component Gaussian mixtures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--model", choices=("gaussian", "mixture"), default="gaussian")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta-star", dest="theta_star", default=None,
                   help="comma-separated truth location (default: zeros)")
    p.add_argument("--sigma2-star", dest="sigma2_star", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit one algorithm to a dataset CSV")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--data", required=True)
    _add_solver_flags(p)
    p.add_argument("--trace-out", dest="trace_out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="run a statistical-radius sweep from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, help="per-(n, trial) results CSV")
    p.add_argument("--summary-out", dest="summary_out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("iters", help="measure iterations-to-best versus n")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_iters)

    p = sub.add_parser("figure", help="emit side-by-side EM/ELU trace CSV")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("check", help="run a landscape / stability / gradient audit")
    p.add_argument("--which", choices=CHECK_NAMES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("diagnose", help="classify a dataset's fitting regime")
    p.add_argument("--data", required=True)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FitError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
