"""Sup-error convergence sweeps for both kernel pairs, operators and signals.

Produces the data behind the convergence plots: per-n sup errors over a
log-spaced interior grid, written as ``n,sup_error`` CSVs with JSON mirrors
carrying the per-point error curves.
"""

import argparse
import json
from pathlib import Path

from expsamp import QuadratureSpec, convergence_sweep
from expsamp.harness import DEFAULT_INTERVAL, write_sweep_csv

PAIRS = {
    "b2_jackson": ("bspline:2", "jackson:1.05:1"),
    "b3_fejer": ("bspline:3", "fejer:pi:0"),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/sweeps")
    ap.add_argument("--n-list", default="17,26,35,53")
    ap.add_argument("--grid-density", type=int, default=400)
    ap.add_argument("--quad-tol", type=float, default=1e-9)
    args = ap.parse_args()

    n_values = [int(t) for t in args.n_list.split(",")]
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    for pair_name, (phi, psi) in PAIRS.items():
        for oper in ("max_product", "max_min"):
            for which in ("h1", "h2"):
                rep = convergence_sweep(
                    oper, phi, psi, which, n_values,
                    grid_density=args.grid_density, interval=DEFAULT_INTERVAL,
                    quad=QuadratureSpec(abs_tol=args.quad_tol),
                )
                stem = f"{pair_name}_{oper}_{which}"
                write_sweep_csv(rep, outdir / f"{stem}.csv")
                mirror = {
                    "pair": pair_name, "operator": oper, "function": which,
                    "interval": list(DEFAULT_INTERVAL),
                    "grid": [float(w) for w in rep.grid],
                    "sup_errors": rep.sup_errors,
                    "per_point": [[float(e) for e in row] for row in rep.per_point],
                    "skipped_counts": rep.skipped_counts,
                }
                (outdir / f"{stem}.json").write_text(json.dumps(mirror) + "\n")
                print(f"{stem}: sup errors {['%.4f' % e for e in rep.sup_errors]}")


if __name__ == "__main__":
    main()
