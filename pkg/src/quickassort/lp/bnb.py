"""Best-bound branch and bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .highs import HighsSession
from .model import LinearModel
from .result import LpStatus, MipResult, MipStatus
from .simplex import SimplexSession

INT_TOL = 1e-6


@dataclass
class MipOptions:
    mip_gap: float = 1e-4
    node_limit: int | None = None
    time_limit: float | None = None
    backend: str = "highs"  # "highs" or "simplex"


def make_session(model: LinearModel, backend: str = "highs"):
    if backend == "highs":
        return HighsSession(model)
    if backend == "simplex":
        return SimplexSession(model)
    raise ValueError(f"unknown LP backend {backend!r}")


def _beats(value: float, inc: float) -> bool:
    """``value`` exceeds the incumbent by more than round-off (any finite value beats none)."""
    if not np.isfinite(inc):
        return value > inc
    return value > inc + 1e-12 * max(1.0, abs(inc))


def _rel_gap(bound: float, inc: float) -> float:
    return max(0.0, bound - inc) / max(1.0, abs(inc))


def solve_mip(
    model: LinearModel,
    options: MipOptions | None = None,
    incumbent: tuple[float, object] | None = None,
    session=None,
    repair: Callable[[np.ndarray], tuple[float, object] | None] | None = None,
    repair_every: int = 1,
) -> MipResult:
    """Maximize ``model`` with its binary variables enforced.

    ``incumbent`` seeds the search with a known objective value and an
    opaque payload describing the solution (anything the caller can turn
    back into an answer).  When the best solution at the end is not an
    integral node LP solution, the result has ``x=None`` and carries that
    payload instead.

    ``session`` lets a caller hand over an LP session that already holds
    extra rows (cuts); its current bounds are taken as the root bounds.
    ``repair`` may turn a fractional node solution into a feasible one
    (primal heuristic); it returns ``(objective, payload)`` or None and is
    tried at the root and then every ``repair_every`` nodes.
    """
    opts = options or MipOptions()
    start = time.perf_counter()
    sess = session if session is not None else make_session(model, opts.backend)
    root_lb, root_ub = sess.bounds()
    ints = model.integer_vars()
    inc_val, inc_x, payload = -np.inf, None, None
    if incumbent is not None:
        inc_val, payload = float(incumbent[0]), incumbent[1]

    counter = itertools.count()
    # node: fixings of integer vars as (lb, ub) arrays restricted to ``ints``
    heap = [(-np.inf, next(counter), root_lb[ints].copy(), root_ub[ints].copy())]
    nodes = 0
    history = []
    limit_hit = False
    best_open = np.inf
    while heap:
        best_open = -heap[0][0]
        if np.isfinite(inc_val) and _rel_gap(best_open, inc_val) <= opts.mip_gap:
            break
        if opts.node_limit is not None and nodes >= opts.node_limit:
            limit_hit = True
            break
        if opts.time_limit is not None and time.perf_counter() - start > opts.time_limit:
            limit_hit = True
            break
        neg_bound, _, nlb, nub = heapq.heappop(heap)
        if not _beats(-neg_bound, inc_val):
            continue
        sess.set_bounds(ints, nlb, nub)
        res = sess.solve()
        nodes += 1
        if res.status is LpStatus.OPTIMAL:
            val = min(res.objective, -neg_bound)
            if _beats(val, inc_val):
                xi = res.x[ints]
                frac = np.abs(xi - np.round(xi))
                if frac.max(initial=0.0) <= INT_TOL:
                    inc_val, inc_x, payload = res.objective, res.x.copy(), None
                else:
                    if repair is not None and (nodes == 1 or nodes % repair_every == 0):
                        fixed = repair(res.x)
                        if fixed is not None and fixed[0] > inc_val:
                            inc_val, inc_x, payload = float(fixed[0]), None, fixed[1]
                    # most fractional binary; argmax returns the lowest index on ties
                    k = int(np.argmax(np.minimum(xi - np.floor(xi), np.ceil(xi) - xi)))
                    for lo, hi in ((0.0, 0.0), (1.0, 1.0)):
                        clb, cub = nlb.copy(), nub.copy()
                        clb[k], cub[k] = lo, hi
                        heapq.heappush(heap, (-val, next(counter), clb, cub))
        elif res.status is LpStatus.UNBOUNDED:
            raise RuntimeError("relaxation unbounded; the model needs finite bounds")
        elif res.status is LpStatus.NUMERICAL_FAILURE:
            raise RuntimeError("LP solve failed numerically at a branch-and-bound node")
        open_bound = max(-heap[0][0], inc_val) if heap else inc_val
        history.append((nodes, float(open_bound), float(inc_val)))

    sess.set_bounds(ints, root_lb[ints], root_ub[ints])
    bound = max(-heap[0][0], inc_val) if heap else inc_val
    elapsed = time.perf_counter() - start
    its = getattr(sess, "iterations", 0)
    if not np.isfinite(inc_val):
        status = MipStatus.NO_SOLUTION if limit_hit else MipStatus.INFEASIBLE
        return MipResult(status, None, float("nan"), float(bound), nodes, elapsed, its, history)
    status = MipStatus.FEASIBLE if (limit_hit and _rel_gap(bound, inc_val) > opts.mip_gap) else MipStatus.OPTIMAL
    return MipResult(status, inc_x, float(inc_val), float(bound), nodes, elapsed, its, history, payload)
