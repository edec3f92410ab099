"""Offline MNL plus independent online demand: exact LP and randomized rounding.

The LP keeps a continuous offer level ``x_j`` (no upper bound) and the
offline store's Charnes-Cooper point, linked by the Under family, which is
separated lazily.  An optimal point decomposes into a lottery over nested
assortments ``C_0 ⊂ C_1 ⊂ ... ⊂ C_n`` whose expected revenue equals the LP
value, so the LP is exact and sampling the lottery gives an optimal random
assortment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .choice import mnl_revenue
from .formulations import build_idm_lp, under_row
from .instance import IdmInstance, validate_idm
from .lp.highs import HighsSession
from .lp.result import LpStatus
from .separation import CutPool, separate_segment

TIGHT_TOL = 1e-6
TIE_TOL = 1e-9


@dataclass
class IdmPoint:
    x: np.ndarray
    y0: float
    y: np.ndarray
    objective: float
    rounds: int = 0
    cuts: int = 0


def idm_objective(idm: IdmInstance, x: np.ndarray, y: np.ndarray) -> float:
    off = idm.base.offline
    return float(off.alpha * (off.r * off.u) @ y + idm.online_value() @ x)


def solve_qap_idm(idm: IdmInstance) -> IdmPoint:
    problems = validate_idm(idm)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    model, vm = build_idm_lp(idm)
    sess = HighsSession(model)
    off = idm.base.offline
    pool = CutPool()
    n = idm.n
    for rounds in range(1, 10 * n + 2):
        res = sess.solve()
        if res.status is not LpStatus.OPTIMAL:
            raise RuntimeError(f"independent-demand LP returned {res.status.value}")
        x, y0, y = res.x[vm.x], float(res.x[vm.y0[0]]), res.x[vm.y[0]]
        rows = [
            under_row(off, c.j, c.S, int(vm.x[c.j]), int(vm.y0[0]), vm.y[0])
            for c in separate_segment(0, off, x, y0, y, under=True, over=False)
            if pool.add(c)
        ]
        if not rows:
            break
        sess.add_rows(rows)
    else:
        raise RuntimeError("Under separation did not converge")
    x = _tighten(off, x, y0, y)
    return IdmPoint(x, y0, y, idm_objective(idm, x, y), rounds, len(pool))


def _min_under_bound(seg, y0: float, y: np.ndarray) -> np.ndarray:
    """Smallest right-hand side ``U(S+j) y_j + sum_{t not in S+j} u_t y_t`` over S, per product."""
    total = float(seg.u @ y)
    out = np.empty(len(y))
    for j in range(len(y)):
        inside = y >= y[j]  # includes j itself
        out[j] = (seg.u0 + seg.u[inside].sum()) * y[j] + total - float(seg.u[inside] @ y[inside])
    return out


def _tighten(seg, x: np.ndarray, y0: float, y: np.ndarray) -> np.ndarray:
    """Raise every ``x_j`` to its tightest Under bound.

    ``x`` appears only in Under rows, with nonnegative objective weight, so
    this keeps the point feasible and optimal while making the Under bound
    tight for products the objective is indifferent to.
    """
    return np.maximum(x, _min_under_bound(seg, y0, y))


@dataclass
class RoundingDistribution:
    sets: list[frozenset[int]]
    probs: np.ndarray
    point: IdmPoint | None = None
    order: list[int] = field(default_factory=list)

    def expected_revenue(self, idm: IdmInstance) -> float:
        off = idm.base.offline
        online = idm.online_value()
        return float(sum(p * (off.alpha * mnl_revenue(off, sorted(s)) + online[list(s)].sum())
                         for s, p in zip(self.sets, self.probs)))

    def inclusion(self, n: int) -> np.ndarray:
        """``P(j in sampled set)`` for every product."""
        out = np.zeros(n)
        for s, p in zip(self.sets, self.probs):
            out[list(s)] += p
        return out

    def to_dict(self) -> dict:
        return {"support": [[[j + 1 for j in sorted(s)], float(p)] for s, p in zip(self.sets, self.probs)]}


def _tie_aware_order(y: np.ndarray, precedence) -> list[int]:
    """Products by descending ``y``; near-equal values ordered so predecessors come first."""
    n = len(y)
    by_value = sorted(range(n), key=lambda j: (-y[j], j))
    scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
    groups, cur = [], [by_value[0]] if n else []
    for a, b in zip(by_value, by_value[1:]):
        if y[a] - y[b] <= TIE_TOL * scale:
            cur.append(b)
        else:
            groups.append(cur)
            cur = [b]
    if cur:
        groups.append(cur)
    g = nx.DiGraph(list(precedence))
    order = []
    for grp in groups:
        sub = nx.DiGraph()
        sub.add_nodes_from(grp)
        sub.add_edges_from((a, b) for a, b in g.subgraph(grp).edges())
        cond = nx.condensation(sub)
        key = {c: min(cond.nodes[c]["members"]) for c in cond.nodes}
        for c in nx.lexicographical_topological_sort(cond, key=key.__getitem__):
            order.extend(sorted(cond.nodes[c]["members"]))
    return order


def build_rounding(idm: IdmInstance, point: IdmPoint) -> RoundingDistribution:
    """Lottery over nested prefix sets reproducing ``point`` in expectation."""
    off = idm.base.offline
    y, y0, x = point.y, point.y0, point.x
    n = idm.n
    order = _tie_aware_order(y, idm.precedence)
    vals = np.concatenate([[y0], y[order], [0.0]])
    U = off.u0 + np.concatenate([[0.0], np.cumsum(off.u[order])])
    lam = U * (vals[:-1] - vals[1:])
    lam = np.where(lam < 0, 0.0, lam)  # tolerance-grouped ties can leave -1e-12 residue
    # Under must be tight at S = products ahead of j
    total = float(off.u @ y)
    for pos, j in enumerate(order):
        ahead = order[: pos + 1]
        bound = U[pos + 1] * y[j] + total - float(off.u[ahead] @ y[ahead])
        if abs(bound - x[j]) > TIGHT_TOL * max(1.0, abs(x[j])):
            raise ValueError(f"point not LP-optimal: Under not tight for product {j + 1} ({bound!r} vs {x[j]!r})")
    sets = [frozenset(order[:k]) for k in range(n + 1)]
    return RoundingDistribution(sets, lam / lam.sum(), point, order)


def sample_assortments(dist: RoundingDistribution, seed: int, size: int) -> np.ndarray:
    """Indices into ``dist.sets`` of ``size`` independent draws."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(size), side="right")


def sample_assortment(dist: RoundingDistribution, seed: int) -> frozenset[int]:
    return dist.sets[int(sample_assortments(dist, seed, 1)[0])]


def brute_force_idm(idm: IdmInstance) -> tuple[frozenset[int], float]:
    """Best precedence-closed offline set by enumeration (small ``n`` only)."""
    n = idm.n
    if n > 15:
        raise ValueError("brute force limited to n <= 15")
    off = idm.base.offline
    online = idm.online_value()
    best, best_val = frozenset(), -np.inf
    for k in range(n + 1):
        for S in itertools.combinations(range(n), k):
            if not idm.precedence_closed(S):
                continue
            val = off.alpha * mnl_revenue(off, list(S)) + online[list(S)].sum()
            if val > best_val + 1e-12:
                best, best_val = frozenset(S), val
    return best, float(best_val)


def generate_idm(n: int, m: int, seed: int, arc_prob: float = 0.2, alpha0: float = 0.5) -> IdmInstance:
    """Random independent-demand instance with a random precedence DAG.

    Segments come from :func:`generate_synthetic` (so ``n >= m``); purchase
    probabilities ``theta ~ U(0.05, 0.5)``; each pair ``a < b`` of a random
    product order becomes a precedence arc with probability ``arc_prob``.
    """
    from .instance import generate_synthetic

    base = generate_synthetic(n, m, alpha0, 1.0, seed)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2,))))
    theta = rng.uniform(0.05, 0.5, (m, n))
    perm = rng.permutation(n)
    arcs = [(int(perm[a]), int(perm[b])) for a in range(n) for b in range(a + 1, n) if rng.random() < arc_prob]
    return IdmInstance(base, theta, tuple(arcs))
