"""Exact separation of the Under and Over inequalities.

For one segment with weights ``u``, product ``j`` and ``S`` not containing
``j``, write ``U(S) = u0 + sum_{t in S} u_t`` and ``a(S) = 1/U(S)``.  The
two families bound ``y_j`` from below and above:

    Under:  y_j >= a(S+j) * (x_j - sum_{t not in S+j} u_t y_t)
    Over:   y_j <= a(S+j) * x_j + (1 - (u0 + u_j) a(S+j)) y0 - a(S+j) * sum_{t in S} u_t y_t

The most violated ``S`` is a prefix of the products sorted by ``y``
(descending, ties by ascending index): everything with ``y_t >= y_j`` for
Under, and everything with ``y_t >= y0 - y_j`` for Over.  One sort per
segment serves all products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formulations import VarMap, under_row
from .instance import Segment
from .lp.model import Row

VIOLATION_TOL = 1e-7
UNDER = "Under"
OVER = "Over"


@dataclass(frozen=True)
class Cut:
    segment: int
    j: int
    S: tuple[int, ...]
    kind: str
    violation: float

    @property
    def key(self) -> tuple:
        return (self.segment, self.j, self.kind, self.S)


@dataclass(frozen=True)
class _Sorted:
    order: np.ndarray     # product ids by descending y, ties by ascending id
    neg_y: np.ndarray     # -y in that order (ascending, for searchsorted)
    cum_u: np.ndarray     # prefix sums of u, length n+1
    cum_uy: np.ndarray    # prefix sums of u*y, length n+1


def _sort(seg: Segment, y: np.ndarray) -> _Sorted:
    order = np.lexsort((np.arange(len(y)), -y))
    uy = seg.u[order] * y[order]
    return _Sorted(
        order,
        -y[order],
        np.concatenate([[0.0], np.cumsum(seg.u[order])]),
        np.concatenate([[0.0], np.cumsum(uy)]),
    )


def _prefix_members(srt: _Sorted, threshold: np.ndarray) -> np.ndarray:
    """Number of leading sorted products with ``y_t >= threshold`` (per entry)."""
    return np.searchsorted(srt.neg_y, -threshold, side="right")


def under_violations(seg: Segment, x: np.ndarray, y0: float, y: np.ndarray, srt: _Sorted | None = None):
    """Maximum Under violation for every product, plus the prefix length defining ``S* + j``."""
    srt = srt or _sort(seg, y)
    k = _prefix_members(srt, y)  # j itself satisfies y_j >= y_j, so it is inside the prefix
    U = seg.u0 + srt.cum_u[k]
    outside = srt.cum_uy[-1] - srt.cum_uy[k]
    viol = (x - outside) / U - y
    return viol, k


def over_violations(seg: Segment, x: np.ndarray, y0: float, y: np.ndarray, srt: _Sorted | None = None):
    """Maximum Over violation for every product, plus prefix length and whether ``j`` sits in it."""
    srt = srt or _sort(seg, y)
    k = _prefix_members(srt, y0 - y)
    self_in = y >= y0 - y
    sum_u = srt.cum_u[k] - np.where(self_in, seg.u, 0.0)
    sum_uy = srt.cum_uy[k] - np.where(self_in, seg.u * y, 0.0)
    a = 1.0 / (seg.u0 + seg.u + sum_u)
    rhs = a * x + (1.0 - (seg.u0 + seg.u) * a) * y0 - a * sum_uy
    return y - rhs, k, self_in


def _members(srt: _Sorted, k: int, j: int) -> tuple[int, ...]:
    return tuple(sorted(int(t) for t in srt.order[:k] if t != j))


def separate_segment(
    i: int, seg: Segment, x: np.ndarray, y0: float, y: np.ndarray, under: bool = True, over: bool = True,
    tol: float = VIOLATION_TOL,
) -> list[Cut]:
    """All violated Under/Over cuts for one segment, ordered by (product, kind)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    srt = _sort(seg, y)
    cuts = []
    if under:
        viol, k = under_violations(seg, x, y0, y, srt)
        for j in np.flatnonzero(viol > tol):
            cuts.append(Cut(i, int(j), _members(srt, int(k[j]), int(j)), UNDER, float(viol[j])))
    if over:
        viol, k, _ = over_violations(seg, x, y0, y, srt)
        for j in np.flatnonzero(viol > tol):
            cuts.append(Cut(i, int(j), _members(srt, int(k[j]), int(j)), OVER, float(viol[j])))
    cuts.sort(key=lambda c: (c.j, c.kind))
    return cuts


def separate_under(seg: Segment, j: int, xj: float, y0: float, y: np.ndarray, i: int = 0,
                   tol: float = VIOLATION_TOL) -> Cut | None:
    x = np.zeros(len(y))
    x[j] = xj
    srt = _sort(seg, np.asarray(y, dtype=float))
    viol, k = under_violations(seg, x, y0, np.asarray(y, dtype=float), srt)
    if viol[j] > tol:
        return Cut(i, j, _members(srt, int(k[j]), j), UNDER, float(viol[j]))
    return None


def separate_over(seg: Segment, j: int, xj: float, y0: float, y: np.ndarray, i: int = 0,
                  tol: float = VIOLATION_TOL) -> Cut | None:
    x = np.zeros(len(y))
    x[j] = xj
    y = np.asarray(y, dtype=float)
    srt = _sort(seg, y)
    viol, k, _ = over_violations(seg, x, y0, y, srt)
    if viol[j] > tol:
        return Cut(i, j, _members(srt, int(k[j]), j), OVER, float(viol[j]))
    return None


def under_value(seg: Segment, j: int, S, xj: float, y0: float, y: np.ndarray) -> float:
    """Violation ``rhs - y_j`` of the Under inequality at a given ``S`` (for checks)."""
    mask = np.zeros(seg.n, dtype=bool)
    mask[list(S)] = True
    mask[j] = True
    a = 1.0 / (seg.u0 + seg.u[mask].sum())
    return a * (xj - float(seg.u[~mask] @ np.asarray(y)[~mask])) - y[j]


def over_value(seg: Segment, j: int, S, xj: float, y0: float, y: np.ndarray) -> float:
    """Violation ``y_j - rhs`` of the Over inequality at a given ``S``."""
    mask = np.zeros(seg.n, dtype=bool)
    mask[list(S)] = True
    mask[j] = False
    a = 1.0 / (seg.u0 + seg.u[j] + seg.u[mask].sum())
    rhs = a * xj + (1.0 - (seg.u0 + seg.u[j]) * a) * y0 - a * float(seg.u[mask] @ np.asarray(y)[mask])
    return y[j] - rhs


def cut_to_row(cut: Cut, seg: Segment, vm: VarMap) -> Row:
    """The cut as a model row, scaled by ``U(S+j)`` so no reciprocal enters the coefficients."""
    i, j = cut.segment, cut.j
    xj, y0, y = int(vm.x[j]), int(vm.y0[i]), vm.y[i]
    if cut.kind == UNDER:
        row = under_row(seg, j, cut.S, xj, y0, y)
    else:
        S = np.array(cut.S, dtype=np.int64)
        su = seg.u[S]
        U = seg.u0 + seg.u[j] + float(su.sum())
        keep = su > 0
        idx = np.concatenate([[y[j], xj], [y0] if keep.any() else [], y[S[keep]]]).astype(np.int64)
        val = np.concatenate([[U, -1.0], [-float(su.sum())] if keep.any() else [], su[keep]])
        row = Row(idx, val, "<=", 0.0)
    row.name = f"{cut.kind.lower()}{i}_{j}_" + "_".join(map(str, cut.S))
    return row


class CutPool:
    """Deduplicates cuts by (segment, product, kind, S)."""

    def __init__(self):
        self.keys: set[tuple] = set()
        self.cuts: list[Cut] = []

    def add(self, cut: Cut) -> bool:
        if cut.key in self.keys:
            return False
        self.keys.add(cut.key)
        self.cuts.append(cut)
        return True

    def __len__(self) -> int:
        return len(self.cuts)
