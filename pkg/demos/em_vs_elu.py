"""Race EM against the exponential-step-size update on one over-specified fit.

Draws n standard-normal samples (the true location is zero, so the fitted
two-component mixture is over-specified), runs EM and the exponential update
from the same initial point, and prints the per-iteration location error of
each method. The exponential update reaches its best error in O(log n)
iterations and then diverges; validation-based early stopping marks that
best iterate. EM creeps toward the same radius at a sub-linear rate.

Run: python3 demos/em_vs_elu.py [--n 100000] [--out traces.csv]
"""
import argparse

from twomix import SolverConfig, run_figure, save_figure_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=100_000, help="sample size")
    parser.add_argument("--out", default=None, help="optional CSV path for the full traces")
    args = parser.parse_args()

    config = SolverConfig(eta=0.01, beta=0.8, max_iters=200, val_fraction=0.1, seed=0)
    rows = run_figure("isotropic", d=1, n=args.n, config=config)

    for algo in ("em", "elu"):
        trace = [row for row in rows if row.algorithm == algo]
        best = next(row for row in trace if row.is_best)
        print(f"{algo.upper():4s} ran {len(trace) - 1} iterations")
        print(f"     best validation objective at iteration {best.iter}")
        print(f"     location error there: {best.err_location:.5f}")
        checkpoints = [0, len(trace) // 4, len(trace) // 2, 3 * len(trace) // 4, len(trace) - 1]
        for t in sorted(set(checkpoints)):
            row = trace[t]
            marker = "  <- early-stop pick" if row.is_best else ""
            print(f"     iter {row.iter:4d}  err_location {row.err_location:.5f}{marker}")

    if args.out:
        save_figure_csv(rows, args.out)
        print(f"wrote {len(rows)} trace rows to {args.out}")


if __name__ == "__main__":
    main()
