"""Exact solution of the assortment problem: cut rounds on CH-0, then branch and bound."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .choice import NonVertexPoint, ChoicePoint, best_revenue_prefix, cc_inverse, mnl_revenue, undominated
from .formulations import VarMap, build_ch0, build_cons_mnl_lp, build_milp_bigm, tangent_row, tangent_violation
from .instance import Instance, validate
from .lp.bnb import INT_TOL, MipOptions, make_session, solve_mip
from .lp.highs import HighsSession
from .lp.model import LinearModel
from .lp.result import LpStatus, MipStatus
from .separation import VIOLATION_TOL, CutPool, cut_to_row, separate_segment
from .solution import QapSolution

__all__ = [
    "SolveOptions",
    "QapSolution",
    "RoundStats",
    "cutting_plane_rounds",
    "solve_qap",
    "extract_assortments",
    "best_online_sets",
]


@dataclass
class SolveOptions:
    K: int = 2
    formulation: str = "CH"  # "CH" or "MILP"
    mip: MipOptions = field(default_factory=MipOptions)
    warm_start: bool = True
    repair_every: int = 25


@dataclass
class RoundStats:
    #: relaxation value before round 1, after round 1, ... (nonincreasing up to LP tolerance)
    values: list[float] = field(default_factory=list)
    cuts_per_round: list[int] = field(default_factory=list)
    tangents_per_round: list[int] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.cuts_per_round)

    @property
    def cuts(self) -> int:
        return sum(self.cuts_per_round) + sum(self.tangents_per_round)


class RelaxationError(RuntimeError):
    pass


def _relax(session) -> tuple[float, np.ndarray]:
    res = session.solve()
    if res.status is not LpStatus.OPTIMAL:
        raise RelaxationError(f"continuous relaxation returned {res.status.value}")
    return res.objective, res.x


def cutting_plane_rounds(
    model: LinearModel, vm: VarMap, instance: Instance, K: int, session=None, pool: CutPool | None = None
) -> tuple[object, RoundStats]:
    """Run ``K`` separation rounds on the continuous relaxation of ``model``.

    Under cuts are separated for the offline segment only, Over cuts for
    every segment, and violated tangents of the no-purchase bound are
    refreshed.  Rows are appended to ``model`` and to the LP ``session``
    (created when not given), which is returned for the final MIP solve.
    """
    session = session if session is not None else make_session(model)
    pool = pool if pool is not None else CutPool()
    stats = RoundStats()
    if K <= 0:
        return session, stats
    value, sol = _relax(session)
    stats.values.append(value)
    for _ in range(K):
        rows = []
        x = sol[vm.x]
        ncuts = ntan = 0
        for i, seg in enumerate(instance.segments):
            y0 = float(sol[vm.y0[i]])
            y = sol[vm.y[i]]
            for cut in separate_segment(i, seg, x, y0, y, under=(i == 0), over=True):
                if pool.add(cut):
                    rows.append(cut_to_row(cut, seg, vm))
                    ncuts += 1
            viol, w = tangent_violation(seg, y0, x)
            if viol > VIOLATION_TOL:
                rows.append(tangent_row(seg, i, vm, w))
                ntan += 1
        stats.cuts_per_round.append(ncuts)
        stats.tangents_per_round.append(ntan)
        if not rows:
            stats.values.append(value)
            continue
        model.add_rows(rows)
        session.add_rows(rows)
        value, sol = _relax(session)
        stats.values.append(value)
    return session, stats


# ------------------------------------------------------------------ extraction


def _luce_best(seg, order, allowed: np.ndarray) -> np.ndarray:
    """Revenue-maximizing antichain inside ``allowed`` via the chain-constrained LP."""
    if not allowed.any():
        return allowed.copy()
    model, vm = build_cons_mnl_lp(seg, order, fixed_zero=~allowed)
    res = HighsSession(model).solve()
    if not res.optimal:
        raise RelaxationError("restricted two-stage Luce LP failed")
    y0 = float(res.x[vm.y0[0]])
    y = res.x[vm.y[0]]
    try:
        mask = np.zeros(seg.n, dtype=bool)
        mask[list(cc_inverse(ChoicePoint(y0, y), tol=1e-6 * y0))] = True
    except NonVertexPoint:
        mask = y >= 0.5 * y0
    mask &= allowed
    mask = undominated(order, mask)
    if mnl_revenue(seg, mask) < res.objective - 1e-7 * max(1.0, abs(res.objective)):
        raise RelaxationError("chain LP vertex does not decode to an optimal antichain")
    return mask


def best_online_sets(instance: Instance, offline: np.ndarray) -> list[np.ndarray]:
    """Revenue-maximizing online set of every segment given the offline set."""
    out = []
    for i in range(1, instance.m + 1):
        seg = instance.segments[i]
        if instance.is_luce(i):
            out.append(_luce_best(seg, instance.orders[i], offline))
        else:
            out.append(best_revenue_prefix(seg, offline)[0])
    return out


def extract_assortments(instance: Instance, x: np.ndarray) -> tuple[frozenset[int], list[frozenset[int]]]:
    x = np.asarray(x, dtype=float)
    if np.max(np.abs(x - np.round(x)), initial=0.0) > INT_TOL:
        raise ValueError("offline indicator is not integral")
    offline = x >= 0.5
    online = best_online_sets(instance, offline)
    return frozenset(np.flatnonzero(offline).tolist()), [frozenset(np.flatnonzero(m).tolist()) for m in online]


def _round_offline(instance: Instance, x: np.ndarray) -> np.ndarray | None:
    """Nearest feasible offline set to a fractional ``x`` (cardinality keeps the top K)."""
    oc = instance.offline_constraint
    mask = x >= 0.5
    if oc.kind == "cardinality" and mask.sum() > oc.K:
        keep = np.lexsort((np.arange(len(x)), -x))[: oc.K]
        mask = np.zeros(len(x), dtype=bool)
        mask[keep] = True
    return mask if oc.feasible(mask) else None


# ------------------------------------------------------------------ driver


def _heuristic_seed(instance: Instance) -> QapSolution | None:
    from .heuristics import improved_ro

    if instance.offline_constraint.kind not in ("none", "cardinality"):
        return None
    return improved_ro(instance)


def solve_qap(instance: Instance, options: SolveOptions | None = None) -> QapSolution:
    """Optimal assortment profile for ``instance``.

    CH builds CH-0 (with chain rows for two-stage Luce segments), runs
    ``K`` cut rounds and branches; MILP branches on the big-M model.  The
    returned objective is recomputed from the extracted sets.
    """
    opts = options or SolveOptions()
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    start = time.perf_counter()
    form = opts.formulation.upper()
    if form == "CH":
        model, vm = build_ch0(instance)
        session = make_session(model, opts.mip.backend)
        session, rstats = cutting_plane_rounds(model, vm, instance, opts.K, session=session)
    elif form == "MILP":
        model, vm = build_milp_bigm(instance)
        session = make_session(model, opts.mip.backend)
        rstats = RoundStats()
    else:
        raise ValueError(f"unknown formulation {opts.formulation!r}")

    seed = _heuristic_seed(instance) if opts.warm_start else None
    incumbent = (seed.objective, seed) if seed is not None else None

    def repair(sol: np.ndarray):
        mask = _round_offline(instance, sol[vm.x])
        if mask is None:
            return None
        online = best_online_sets(instance, mask)
        cand = QapSolution.from_sets(instance, mask, online, "repair")
        return cand.objective, cand

    res = solve_mip(model, opts.mip, incumbent=incumbent, session=session, repair=repair,
                    repair_every=opts.repair_every)
    if res.status in (MipStatus.INFEASIBLE, MipStatus.NO_SOLUTION):
        raise RuntimeError(f"no feasible assortment found ({res.status.value})")
    tag = f"CH-{opts.K}" if form == "CH" else "MILP"
    if res.x is not None:
        offline, online = extract_assortments(instance, res.x[vm.x])
        sol = QapSolution.from_sets(instance, offline, online, tag)
        if sol.objective < res.objective - 1e-6 * max(1.0, abs(res.objective)):
            raise RuntimeError(
                f"extracted profile revenue {sol.objective!r} below branch-and-bound value {res.objective!r}"
            )
    else:
        # heuristic or repaired incumbent: keep its offline set, re-optimize online
        offline = np.zeros(instance.n, dtype=bool)
        offline[list(res.payload.offline)] = True
        sol = QapSolution.from_sets(instance, offline, best_online_sets(instance, offline), tag)
    sol.stats.update(
        status=res.status.value,
        bound=max(res.bound, sol.objective),
        gap=max(0.0, res.bound - sol.objective) / max(1.0, abs(sol.objective)),
        nodes=res.nodes,
        cuts=rstats.cuts,
        rounds=rstats.rounds,
        relaxation_values=list(rstats.values),
        seed_objective=None if seed is None else seed.objective,
        time_s=time.perf_counter() - start,
        num_rows=model.num_rows,
        num_vars=model.num_vars,
    )
    return sol
