"""Revenue-ordered heuristics for the assortment problem."""

from __future__ import annotations

import numpy as np

from .choice import best_revenue_prefix, mnl_revenue, undominated
from .formulations import build_cons_mnl_lp
from .instance import Instance, PartialOrder, Segment
from .lp.highs import HighsSession
from .solution import QapSolution

TIE_TOL = 1e-12


def _by_revenue(seg: Segment, allowed: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(allowed)
    return idx[np.lexsort((idx, -seg.r[idx]))]


def enum_online(seg: Segment, order: PartialOrder | None, allowed: np.ndarray) -> tuple[np.ndarray, float]:
    """Revenue-ordered online set within ``allowed``.

    Plain MNL: grow the prefix until revenue drops; a tie keeps growing and
    the longer prefix is kept.  Two-stage Luce: scan every prefix, each
    evaluated after removing dominated products, and keep the first best.
    """
    n = seg.n
    best = np.zeros(n, dtype=bool)
    best_rev = 0.0
    prefix = np.zeros(n, dtype=bool)
    for j in _by_revenue(seg, allowed):
        prefix[j] = True
        if order is None:
            rev = mnl_revenue(seg, prefix)
            if rev < best_rev - TIE_TOL * max(1.0, best_rev):
                break
            if rev > 0.0:
                best, best_rev = prefix.copy(), max(rev, best_rev)
            continue
        cand = undominated(order, prefix)
        rev = mnl_revenue(seg, cand)
        if rev > best_rev + TIE_TOL * max(1.0, best_rev):
            best, best_rev = cand.copy(), rev
    return best, mnl_revenue(seg, best)


def _online(instance: Instance, offline: np.ndarray) -> tuple[list[np.ndarray], float]:
    sets, total = [], 0.0
    for i in range(1, instance.m + 1):
        seg = instance.segments[i]
        mask, rev = enum_online(seg, instance.orders.get(i), offline)
        sets.append(mask)
        total += seg.alpha * rev
    return sets, total


def _cardinality_offline(instance: Instance) -> np.ndarray:
    """Offline-only MNL optimum under ``|S| <= K`` from the constrained LP."""
    seg = instance.offline
    model, vm = build_cons_mnl_lp(seg, instance.offline_constraint.system(instance.n))
    res = HighsSession(model).solve()
    y0 = res.x[vm.y0[0]]
    mask = res.x[vm.y[0]] >= 0.5 * y0
    if mask.sum() > instance.offline_constraint.K:
        raise RuntimeError("cardinality LP returned a non-integral vertex")
    return mask


def two_step_ro(instance: Instance) -> QapSolution:
    """Revenue-ordered offline set for the offline store, then revenue-ordered online subsets."""
    if instance.offline_constraint.kind == "none":
        offline, _ = enum_online(instance.offline, None, np.ones(instance.n, dtype=bool))
    elif instance.offline_constraint.kind == "cardinality":
        offline = _cardinality_offline(instance)
    else:
        raise ValueError("revenue-ordered heuristics support unconstrained or cardinality offline sets; use solve_qap")
    online, _ = _online(instance, offline)
    return QapSolution.from_sets(instance, offline, online, "RO")


def improved_ro(instance: Instance) -> QapSolution:
    """Best offline revenue-ordered prefix, counting online revenue too."""
    kind = instance.offline_constraint.kind
    if kind == "cardinality":
        offline = _cardinality_offline(instance)
        online, _ = _online(instance, offline)
        return QapSolution.from_sets(instance, offline, online, "IRO")
    if kind != "none":
        raise ValueError("revenue-ordered heuristics support unconstrained or cardinality offline sets; use solve_qap")
    off = instance.offline
    best_val, best_k = -np.inf, 0
    order = _by_revenue(off, np.ones(instance.n, dtype=bool))
    prefix = np.zeros(instance.n, dtype=bool)
    for k in range(instance.n + 1):
        if k:
            prefix[order[k - 1]] = True
        _, online_val = _online(instance, prefix)
        val = off.alpha * mnl_revenue(off, prefix) + online_val
        if val > best_val:
            best_val, best_k = val, k
    offline = np.zeros(instance.n, dtype=bool)
    offline[order[:best_k]] = True
    online, _ = _online(instance, offline)
    return QapSolution.from_sets(instance, offline, online, "IRO")


__all__ = ["two_step_ro", "improved_ro", "enum_online", "best_revenue_prefix"]
