"""Fraction of the root relaxation gap closed by each round of hull cuts."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from quickassort.cli import make_instance
from quickassort.lp.bnb import MipOptions
from quickassort.solver import SolveOptions, solve_qap


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--u-on0", type=float, nargs="+", default=[2.0, 5.0, 10.0])
    p.add_argument("--seeds", type=int, default=12)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--luce", action="store_true")
    p.add_argument("--out", help="per-instance CSV (stdout summary only when omitted)")
    args = p.parse_args(argv)

    rows = []
    for u in args.u_on0:
        for s in range(args.seeds):
            inst = make_instance(args.n, args.m, 0.5, u, s, args.luce)
            sol = solve_qap(inst, SolveOptions(K=args.k, mip=MipOptions(mip_gap=1e-6)))
            vals = sol.stats["relaxation_values"]
            gap = vals[0] - sol.objective
            row = {"u_on0": u, "seed": s, "opt": sol.objective, "root": vals[0], "nodes": sol.stats["nodes"]}
            for r in range(1, len(vals)):
                row[f"closed_{r}"] = (vals[0] - vals[r]) / gap if gap > 1e-9 else np.nan
            rows.append(row)
        closed = np.array([[r.get(f"closed_{k}", np.nan) for k in range(1, args.k + 1)]
                           for r in rows if r["u_on0"] == u])
        means = np.nanmean(closed, axis=0) if np.isfinite(closed).any() else closed[0]
        print(f"u_on0={u:g}: mean gap closed by round " +
              ", ".join(f"{k + 1}: {100 * v:.1f}%" for k, v in enumerate(means)), file=sys.stderr)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
