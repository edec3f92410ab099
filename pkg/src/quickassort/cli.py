"""Command-line entry point: ``quickassort {generate,solve,bench,idm,simulate}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .heuristics import improved_ro, two_step_ro
from .idm import build_rounding, sample_assortments, solve_qap_idm
from .instance import (
    IdmInstance,
    Instance,
    InstanceFormatError,
    OfflineConstraint,
    generate_partial_orders,
    generate_synthetic,
    read_instance,
    with_offline_constraint,
    with_orders,
    write_instance,
)
from .inventory import round_inventory, simulate, write_simulation_csv
from .lp.bnb import MipOptions
from .oracle import MAX_QAP_N, brute_force_qap
from .solution import STATS_COLUMNS, QapSolution, write_stats_csv
from .solver import SolveOptions, solve_qap

EXIT_OK, EXIT_ERROR, EXIT_LIMIT = 0, 1, 2
METHODS = ("ch", "milp", "ro", "iro", "oracle")
AGGREGATE_COLUMNS = ("config", "method", "Time", "Min", "Max", "Std", "Nds", "Solved")
RUN_COLUMNS = ("config", "seed") + STATS_COLUMNS + ("error",)


class CliError(Exception):
    pass


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def make_instance(n, m, alpha0, u_on0, seed, luce=False, cardinality=None) -> Instance:
    inst = generate_synthetic(n, m, alpha0, u_on0, seed)
    if luce:
        inst = with_orders(inst, generate_partial_orders(n, m, seed))
    if cardinality:
        inst = with_offline_constraint(inst, OfflineConstraint.cardinality(cardinality))
    return inst


def run_method(inst: Instance, method: str, K: int = 2, gap: float = 1e-4, time_limit=None,
               node_limit=None, backend: str = "highs") -> QapSolution:
    if method in ("ch", "milp"):
        mip = MipOptions(mip_gap=gap, time_limit=time_limit, node_limit=node_limit, backend=backend)
        return solve_qap(inst, SolveOptions(K=K, formulation=method.upper(), mip=mip))
    direct = {"ro": two_step_ro, "iro": improved_ro, "oracle": brute_force_qap}
    if method not in direct:
        raise CliError(f"unknown method {method!r}")
    if method == "oracle" and inst.n > MAX_QAP_N:
        raise CliError(f"oracle refuses n={inst.n} (limit {MAX_QAP_N})")
    start = time.perf_counter()
    sol = direct[method](inst)
    sol.stats.setdefault("time_s", time.perf_counter() - start)
    return sol


def _load(path) -> Instance | IdmInstance:
    try:
        return read_instance(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except InstanceFormatError as exc:
        raise CliError(str(exc)) from None


# ------------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    if args.n < args.m:
        raise CliError(f"cannot assign unique favorites: need n >= m (got n={args.n}, m={args.m})")
    if args.luce and args.n < 4:
        raise CliError("--luce needs n >= 4")
    inst = make_instance(args.n, args.m, args.alpha0, args.u_on0, args.seed, args.luce, args.cardinality)
    write_instance(inst, args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.input)
    if isinstance(inst, IdmInstance):
        raise CliError("instance carries independent-demand data; use the idm command")
    sol = run_method(inst, args.method, args.k, args.gap, args.time_limit, args.node_limit, args.lp_backend)
    if args.out:
        sol.write_json(args.out)
        stats_path = Path(args.stats) if args.stats else Path(args.out).with_suffix(".csv")
    else:
        print(json.dumps(sol.to_dict(), indent=1))
        stats_path = Path(args.stats) if args.stats else None
    if stats_path is not None:
        write_stats_csv([sol.stats_row(Path(args.input).stem)], stats_path)
    print(f"{sol.method} objective {sol.objective:.6f} offline {sorted(j + 1 for j in sol.offline)}", file=sys.stderr)
    return EXIT_LIMIT if sol.stats.get("status") == "Feasible" else EXIT_OK


def cmd_idm(args) -> int:
    idm = _load(args.input)
    if not isinstance(idm, IdmInstance):
        raise CliError("instance has no 'idm' section")
    point = solve_qap_idm(idm)
    dist = build_rounding(idm, point)
    out = {
        "objective": point.objective,
        "x": point.x.tolist(),
        "y0": point.y0,
        "y": point.y.tolist(),
        "expected_revenue": dist.expected_revenue(idm),
        **dist.to_dict(),
    }
    if args.samples:
        draws = sample_assortments(dist, args.seed, args.samples)
        out["samples"] = [[j + 1 for j in sorted(dist.sets[k])] for k in draws]
    text = json.dumps(out, indent=1) + "\n"
    if args.out:
        _atomic_write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = _load(args.input)
    if isinstance(inst, IdmInstance):
        inst = inst.base
    sol = run_method(inst, args.method, args.k, args.gap, backend=args.lp_backend)
    reports = []
    for T in args.t:
        plan = round_inventory(inst, sol, T)
        rep = simulate(inst, sol, plan.quantities, T, args.paths, args.cost, args.seed)
        reports.append(rep)
        print(f"T={T} V_fluid={rep.V_fluid:.2f} V_sim={rep.V_sim_mean:.2f} (se {rep.V_sim_se:.2f}) "
              f"gap={100 * rep.gap:.2f}%", file=sys.stderr)
    name = Path(args.input).stem
    if args.out:
        write_simulation_csv(reports, args.out, name)
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=list(reports[0].csv_row()))
        w.writeheader()
        for r in reports:
            w.writerow(r.csv_row(name))
    return EXIT_OK


# ------------------------------------------------------------------ bench


@dataclass
class BenchConfig:
    """Grid of instances and methods for ``bench``; every list is crossed with the others."""

    n: list[int] = field(default_factory=lambda: [30])
    m: list[int] = field(default_factory=lambda: [10])
    u_on0: list[float] = field(default_factory=lambda: [2.0])
    luce: list[bool] = field(default_factory=lambda: [False])
    cardinality: list[int | None] = field(default_factory=lambda: [None])
    seeds: list[int] = field(default_factory=lambda: [0])
    methods: list[str] = field(default_factory=lambda: ["ch", "milp"])
    alpha0: float = 0.5
    K: int = 2
    gap: float = 1e-4
    time_limit: float | None = None
    backend: str = "highs"

    @classmethod
    def from_file(cls, path) -> "BenchConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"{path}: {exc}") from None
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise CliError(f"{path}: unknown keys {sorted(unknown)}")
        cfg = cls(**doc)
        for key in ("n", "m", "u_on0", "luce", "cardinality", "seeds", "methods"):
            val = getattr(cfg, key)
            if not isinstance(val, list):
                setattr(cfg, key, [val])
        bad = set(cfg.methods) - set(METHODS)
        if bad:
            raise CliError(f"{path}: unknown methods {sorted(bad)}")
        return cfg

    def cells(self):
        return itertools.product(self.n, self.m, self.u_on0, self.luce, self.cardinality)


def _cell_name(n, m, u, luce, card) -> str:
    name = f"n{n}_m{m}_u{u:g}"
    if luce:
        name += "_luce"
    if card:
        name += f"_K{card}"
    return name


def _bench_one(task):
    cfg, cell, seed, method, out_dir = task
    n, m, u, luce, card = cell
    config = _cell_name(*cell)
    row = {"config": config, "seed": seed, "instance": f"{config}_s{seed}", "method": method, "error": ""}
    try:
        inst = make_instance(n, m, cfg.alpha0, u, seed, luce, card)
        sol = run_method(inst, method, cfg.K, cfg.gap, cfg.time_limit, backend=cfg.backend)
        row.update(sol.stats_row(row["instance"]))
        row["solved"] = sol.stats.get("status", "Optimal") == "Optimal"
        probs = sol.choice_probs
        lines = ["segment," + ",".join(f"p{j + 1}" for j in range(inst.n))]
        lines += [f"{i}," + ",".join(f"{v:.10g}" for v in probs[i]) for i in range(probs.shape[0])]
        _atomic_write(out_dir / "assortments" / f"{row['instance']}_{method}.csv", "\n".join(lines) + "\n")
    except Exception as exc:  # recorded per row, the run continues
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["solved"] = False
    return row


def aggregate(rows: list[dict]) -> list[dict]:
    out = []
    keys = sorted({(r["config"], r["method"]) for r in rows})
    for config, method in keys:
        grp = [r for r in rows if r["config"] == config and r["method"] == method]
        ok = [r for r in grp if r.get("solved")]
        times = np.array([float(r["time_s"]) for r in ok]) if ok else np.array([np.nan])
        nodes = np.array([float(r["nodes"]) for r in ok]) if ok else np.array([np.nan])
        out.append({
            "config": config,
            "method": method,
            "Time": float(np.mean(times)),
            "Min": float(np.min(times)),
            "Max": float(np.max(times)),
            "Std": float(np.std(times, ddof=1)) if len(ok) > 1 else 0.0,
            "Nds": float(np.mean(nodes)),
            "Solved": len(ok),
        })
    return out


def performance_profile(rows: list[dict]) -> list[dict]:
    """Per instance and method, time ratio to the fastest method (inf when unsolved)."""
    out = []
    for inst in sorted({r["instance"] for r in rows}):
        grp = [r for r in rows if r["instance"] == inst]
        solved = [float(r["time_s"]) for r in grp if r.get("solved")]
        best = min(solved) if solved else math.nan
        for r in grp:
            ratio = float(r["time_s"]) / best if r.get("solved") and best > 0 else (1.0 if r.get("solved") else math.inf)
            out.append({"instance": inst, "method": r["method"], "time_s": r.get("time_s", ""), "ratio": ratio})
    return out


def _write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)


def cmd_bench(args) -> int:
    cfg = BenchConfig.from_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, cell, seed, method, out_dir)
             for cell in cfg.cells() for seed in cfg.seeds for method in cfg.methods]
    runs_path = out_dir / "runs.csv"
    rows = []
    with runs_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(RUN_COLUMNS), extrasaction="ignore")
        w.writeheader()
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = pool.map(_bench_one, tasks)
                for row in results:
                    rows.append(row)
                    w.writerow(row)
                    fh.flush()
        else:
            for task in tasks:
                row = _bench_one(task)
                rows.append(row)
                w.writerow(row)
                fh.flush()
    _write_csv(out_dir / "aggregate.csv", AGGREGATE_COLUMNS, aggregate(rows))
    _write_csv(out_dir / "profile.csv", ("instance", "method", "time_s", "ratio"), performance_profile(rows))
    failed = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} runs, {failed} failed; results in {out_dir}", file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quickassort", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--alpha0", type=float, default=0.5)
    g.add_argument("--u-on0", type=float, required=True)
    g.add_argument("--luce", action="store_true", help="attach random dominance orders")
    g.add_argument("--cardinality", type=int, help="offline cardinality limit K")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    def solver_flags(sp):
        sp.add_argument("--method", choices=METHODS, default="ch")
        sp.add_argument("--k", type=int, default=2, help="cut rounds before branching")
        sp.add_argument("--gap", type=float, default=1e-4, help="relative optimality gap")
        sp.add_argument("--lp-backend", choices=("highs", "simplex"), default="highs")

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--in", dest="input", required=True)
    solver_flags(s)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--node-limit", type=int)
    s.add_argument("--out", help="solution JSON (stdout when omitted)")
    s.add_argument("--stats", help="stats CSV (defaults next to --out)")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a grid of instances and methods")
    b.add_argument("--config", required=True, help="JSON grid file")
    b.add_argument("--out-dir", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("idm", help="solve an independent-demand instance and sample assortments")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--samples", type=int, default=0)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_idm)

    m = sub.add_parser("simulate", help="inventory rounding and stockout simulation")
    m.add_argument("--in", dest="input", required=True)
    solver_flags(m)
    m.add_argument("--t", type=_int_list, default=[500, 1000, 2000], help="horizons, comma-separated")
    m.add_argument("--paths", type=int, default=1000)
    m.add_argument("--cost", type=float, default=1.0, help="unit cost c_j")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
