"""Exhaustive solvers for tiny instances, used as ground truth in tests.

Each segment's revenue is tabulated over all ``2^n`` subsets (after removing
dominated products for two-stage Luce segments).  A subset-maximum transform
then gives, for every offline set, the best online revenue reachable inside
it, so no structural property of the choice model is relied upon.
"""

from __future__ import annotations

import numpy as np

from .choice import as_mask
from .instance import Instance, OfflineConstraint, PartialOrder, Segment
from .solution import QapSolution

MAX_QAP_N = 12
MAX_CONS_N = 15
TIE_TOL = 1e-12


def subset_masks(n: int) -> np.ndarray:
    """Row ``s`` is the membership vector of the subset with bit pattern ``s``."""
    s = np.arange(1 << n)
    return ((s[:, None] >> np.arange(n)) & 1).astype(bool)


def subset_revenues(seg: Segment, masks: np.ndarray, order: PartialOrder | None = None) -> np.ndarray:
    eff = masks
    if order is not None:
        eff = masks & ~((masks.astype(np.int64) @ order.dominates.astype(np.int64)) > 0)
    num = eff @ (seg.r * seg.u)
    den = seg.u0 + eff @ seg.u
    return num / den


def subset_max(values: np.ndarray, n: int) -> np.ndarray:
    """``out[S] = max_{T subset of S} values[T]``."""
    out = values.copy()
    idx = np.arange(1 << n)
    for b in range(n):
        has = (idx >> b) & 1 == 1
        out[has] = np.maximum(out[has], out[idx[has] ^ (1 << b)])
    return out


def _lex_key(mask_bits: np.ndarray, n: int):
    return [tuple(np.flatnonzero((int(s) >> np.arange(n)) & 1).tolist()) for s in mask_bits]


def _smallest_lex(cands: np.ndarray, n: int) -> int:
    keys = _lex_key(cands, n)
    return int(cands[min(range(len(cands)), key=keys.__getitem__)])


def _feasible_offline(constraint: OfflineConstraint, masks: np.ndarray) -> np.ndarray:
    sys_ = constraint.system(masks.shape[1])
    if sys_ is None:
        return np.ones(len(masks), dtype=bool)
    A, b = sys_
    return np.all(masks.astype(float) @ A.T <= b + 1e-9, axis=1)


def brute_force_qap(instance: Instance) -> QapSolution:
    n = instance.n
    if n > MAX_QAP_N:
        raise ValueError(f"brute force limited to n <= {MAX_QAP_N}, got n={n}")
    masks = subset_masks(n)
    off = instance.offline
    total = off.alpha * subset_revenues(off, masks)
    tables = []
    for i in range(1, instance.m + 1):
        seg = instance.segments[i]
        rev = subset_revenues(seg, masks, instance.orders.get(i))
        tables.append(rev)
        total = total + seg.alpha * subset_max(rev, n)
    feasible = _feasible_offline(instance.offline_constraint, masks)
    total = np.where(feasible, total, -np.inf)
    best = total.max()
    s0 = _smallest_lex(np.flatnonzero(total >= best - TIE_TOL * max(1.0, abs(best))), n)
    online = []
    sub = np.flatnonzero((np.arange(1 << n) & ~s0) == 0)  # subsets of the offline set
    for i, rev in enumerate(tables, start=1):
        top = rev[sub].max()
        pick = _smallest_lex(sub[rev[sub] >= top - TIE_TOL * max(1.0, abs(top))], n)
        online.append(masks[pick])
    return QapSolution.from_sets(instance, masks[s0], online, "oracle")


def brute_force_cons_mnl(
    segment: Segment,
    constraint: OfflineConstraint | PartialOrder | tuple | None = None,
    fixed_zero: np.ndarray | None = None,
) -> tuple[frozenset[int], float]:
    """Best set for one segment under a cardinality/linear system or a dominance order."""
    n = segment.n
    if n > MAX_CONS_N:
        raise ValueError(f"brute force limited to n <= {MAX_CONS_N}, got n={n}")
    masks = subset_masks(n)
    order = constraint if isinstance(constraint, PartialOrder) else None
    if isinstance(constraint, OfflineConstraint):
        ok = _feasible_offline(constraint, masks)
    elif isinstance(constraint, tuple):
        ok = _feasible_offline(OfflineConstraint.linear(*constraint), masks)
    else:
        ok = np.ones(len(masks), dtype=bool)
    if fixed_zero is not None:
        ok &= ~(masks & as_mask(fixed_zero, n)).any(axis=1)
    rev = np.where(ok, subset_revenues(segment, masks, order), -np.inf)
    best = rev.max()
    s = _smallest_lex(np.flatnonzero(rev >= best - TIE_TOL * max(1.0, abs(best))), n)
    mask = masks[s]
    if order is not None:
        mask = mask & ~((mask.astype(np.int64) @ order.dominates.astype(np.int64)) > 0)
    return frozenset(np.flatnonzero(mask).tolist()), float(best)
