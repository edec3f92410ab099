"""Make-to-stock evaluation of an assortment profile.

Order quantities come from the fluid purchase rates of the profile and are
rounded to integers; a Monte Carlo simulation of ``T`` arrivals with
stockouts then measures how much of the fluid revenue ``T * V*`` survives.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .instance import Instance
from .solution import QapSolution

FRAC_TOL = 1e-9
SIM_COLUMNS = ("instance", "T", "paths", "V_fluid", "V_sim_mean", "V_sim_se", "gap_pct")


def purchase_probabilities(instance: Instance, solution: QapSolution) -> np.ndarray:
    """``beta_j``: probability that one arriving customer buys product ``j``."""
    return instance.alpha @ solution.choice_probs


@dataclass
class InventoryPlan:
    quantities: np.ndarray
    fluid: np.ndarray
    shortfall: int = 0


def round_inventory(instance: Instance, solution: QapSolution, T: int) -> InventoryPlan:
    """Integer orders summing to ``ceil(sum Q)``, where ``Q = T * beta``.

    Every product gets ``floor(Q_j)``; the ``delta = ceil(sum Q) - sum floor(Q)``
    extra units go to offered products with fractional ``Q_j``, highest
    arrival-weighted price first.  Should fewer candidates exist than
    ``delta`` (only under rounding noise), all get one and the shortfall is
    reported.
    """
    if T < 1:
        raise ValueError("horizon T must be at least 1")
    Q = T * purchase_probabilities(instance, solution)
    base = np.floor(Q + FRAC_TOL)
    frac = Q - base
    delta = int(math.ceil(Q.sum() - FRAC_TOL) - base.sum())
    price = instance.alpha @ instance.R
    offered = np.zeros(instance.n, dtype=bool)
    offered[list(solution.offline)] = True
    cand = np.flatnonzero(offered & (frac > FRAC_TOL))
    cand = cand[np.lexsort((cand, -price[cand]))]
    up = cand[: max(delta, 0)]
    q = base.copy()
    q[up] += 1
    return InventoryPlan(q.astype(np.int64), Q, max(0, delta - len(up)))


@dataclass
class SimulationReport:
    V_fluid: float
    V_sim_mean: float
    V_sim_se: float
    path_values: np.ndarray
    T: int
    paths: int
    seed: int

    @property
    def gap(self) -> float:
        return (self.V_fluid - self.V_sim_mean) / self.V_fluid

    def csv_row(self, instance_id: str = "") -> dict:
        return {
            "instance": instance_id,
            "T": self.T,
            "paths": self.paths,
            "V_fluid": self.V_fluid,
            "V_sim_mean": self.V_sim_mean,
            "V_sim_se": self.V_sim_se,
            "gap_pct": 100.0 * self.gap,
        }


def _path_uniforms(seed: int, paths: int, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-path substreams keyed by (seed, path): segment draws and choice draws."""
    seg_u = np.empty((paths, T))
    choice_u = np.empty((paths, T))
    for p in range(paths):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(p,))))
        seg_u[p] = rng.random(T)
        choice_u[p] = rng.random(T)
    return seg_u, choice_u


def simulate(
    instance: Instance,
    solution: QapSolution,
    quantities: np.ndarray,
    T: int,
    paths: int = 1000,
    costs: np.ndarray | float = 1.0,
    seed: int = 0,
) -> SimulationReport:
    """Net revenue over ``T`` arrivals with stock fixed up front.

    Each path pays ``sum_j Q_j c_j`` for its stock, then each arrival draws a
    customer type by ``alpha`` and buys by MNL among that type's set
    restricted to in-stock products; a sale of ``j`` to type ``i`` earns
    ``r_ij + c_j``.
    """
    if paths < 1:
        raise ValueError("need at least one path")
    n = instance.n
    c = np.broadcast_to(np.asarray(costs, dtype=float), (n,)).copy()
    if np.any(c < 0):
        raise ValueError("unit costs must be nonnegative")
    q = np.asarray(quantities, dtype=np.int64)
    masks = solution.masks(n)
    W = instance.U * masks  # offered weights per segment
    price = instance.R + c  # consumer price per segment and product
    cum_alpha = np.cumsum(instance.alpha)
    cum_alpha[-1] = 1.0
    seg_u, choice_u = _path_uniforms(seed, paths, T)
    stock = np.broadcast_to(q, (paths, n)).copy()
    value = np.full(paths, -float(q @ c))
    rows = np.arange(paths)
    for t in range(T):
        seg = np.searchsorted(cum_alpha, seg_u[:, t], side="right")
        w = W[seg] * (stock > 0)
        cw = np.cumsum(w, axis=1)
        draw = choice_u[:, t] * (instance.u0[seg] + cw[:, -1])
        bought = draw < cw[:, -1]
        j = np.argmax(cw > draw[:, None], axis=1)
        hit = rows[bought]
        jj = j[bought]
        value[hit] += price[seg[bought], jj]
        stock[hit, jj] -= 1
    fluid = T * solution.objective
    se = float(value.std(ddof=1) / math.sqrt(paths)) if paths > 1 else 0.0
    return SimulationReport(float(fluid), float(np.mean(value)), se, value, T, paths, seed)


def write_simulation_csv(reports, path, instance_id: str = "") -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SIM_COLUMNS)
        w.writeheader()
        for r in reports:
            w.writerow(r.csv_row(instance_id))
