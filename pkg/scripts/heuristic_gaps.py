"""Relative gap of the revenue-ordered heuristics to the exact optimum over a grid."""

from __future__ import annotations

import argparse
import itertools

import numpy as np

from quickassort.cli import make_instance
from quickassort.heuristics import improved_ro, two_step_ro
from quickassort.solver import solve_qap


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--alpha0", type=float, nargs="+", default=[0.1, 0.5])
    p.add_argument("--u-on0", type=float, nargs="+", default=[2.0, 5.0, 10.0])
    p.add_argument("--seeds", type=int, default=12)
    p.add_argument("--cardinality", type=int, default=None, help="offline limit when capped (default n // 10)")
    args = p.parse_args(argv)
    cap = args.cardinality or max(1, args.n // 10)

    print(f"{'luce':>5} {'cap':>4} {'alpha0':>6} {'u_on0':>6} {'RO %':>8} {'IRO %':>8}")
    for luce, capped, a0, u in itertools.product((False, True), (False, True), args.alpha0, args.u_on0):
        ro, iro = [], []
        for s in range(args.seeds):
            inst = make_instance(args.n, args.m, a0, u, s, luce, cap if capped else None)
            opt = solve_qap(inst).objective
            ro.append((opt - two_step_ro(inst).objective) / opt)
            iro.append((opt - improved_ro(inst).objective) / opt)
        print(f"{luce!s:>5} {capped!s:>4} {a0:6g} {u:6g} {100 * np.mean(ro):8.3f} {100 * np.mean(iro):8.3f}")


if __name__ == "__main__":
    main()
