"""Fluid versus simulated make-to-stock revenue over horizons and no-purchase weights."""

from __future__ import annotations

import argparse

from quickassort.instance import generate_synthetic
from quickassort.inventory import round_inventory, simulate
from quickassort.solver import solve_qap


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--u-on0", type=float, nargs="+", default=[2.0, 5.0, 10.0])
    p.add_argument("--t", type=int, nargs="+", default=[500, 1000, 2000])
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--cost", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)

    print(f"{'u_on0':>6} {'T':>6} {'V_fluid':>12} {'V_sim':>12} {'se':>8} {'gap %':>7}")
    for u in args.u_on0:
        inst = generate_synthetic(args.n, args.m, 0.5, u, args.seed)
        sol = solve_qap(inst)
        for T in args.t:
            q = round_inventory(inst, sol, T).quantities
            rep = simulate(inst, sol, q, T, args.paths, args.cost, args.seed)
            print(f"{u:6g} {T:6d} {rep.V_fluid:12.2f} {rep.V_sim_mean:12.2f} {rep.V_sim_se:8.2f} {100 * rep.gap:7.2f}")


if __name__ == "__main__":
    main()
