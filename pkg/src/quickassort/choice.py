"""Choice-model primitives: MNL revenue, the Charnes-Cooper map and Luce dominance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .instance import PartialOrder, Segment

CC_TOL = 1e-7


class NonVertexPoint(ValueError):
    """Raised when a choice point does not encode a single assortment."""


@dataclass(frozen=True)
class ChoicePoint:
    """Scaled choice probabilities: ``u0*y0`` is the no-purchase probability, ``u_j*y_j`` that of ``j``."""

    y0: float
    y: np.ndarray


def as_mask(assortment: Iterable[int] | np.ndarray, n: int) -> np.ndarray:
    """Boolean membership mask for a product set or an existing mask."""
    arr = np.asarray(assortment if not isinstance(assortment, (set, frozenset)) else sorted(assortment))
    if arr.dtype == bool and arr.shape == (n,):
        return arr.copy()
    mask = np.zeros(n, dtype=bool)
    if arr.size:
        mask[arr.astype(int)] = True
    return mask


def mnl_revenue(segment: Segment, assortment) -> float:
    mask = as_mask(assortment, segment.n)
    num = float(segment.r[mask] @ segment.u[mask])
    return num / (segment.u0 + float(segment.u[mask].sum()))


def luce_revenue(segment: Segment, order: PartialOrder | None, assortment) -> float:
    """Revenue of a segment that first discards dominated products (no order means plain MNL)."""
    mask = as_mask(assortment, segment.n)
    if order is not None:
        mask = undominated(order, mask)
    return mnl_revenue(segment, mask)


def cc_transform(segment: Segment, assortment) -> ChoicePoint:
    mask = as_mask(assortment, segment.n)
    y0 = 1.0 / (segment.u0 + float(segment.u[mask].sum()))
    return ChoicePoint(y0, np.where(mask, y0, 0.0))


def cc_inverse(point: ChoicePoint, tol: float = CC_TOL) -> frozenset[int]:
    y = np.asarray(point.y, dtype=float)
    high = y >= point.y0 - tol
    low = y <= tol
    stray = np.flatnonzero(~(high | low))
    if stray.size:
        raise NonVertexPoint(f"non-vertex point: y[{stray[0]}]={y[stray[0]]!r} with y0={point.y0!r}")
    return frozenset(np.flatnonzero(high).tolist())


def undominated(order: PartialOrder, assortment) -> np.ndarray:
    """Mask of products in ``assortment`` that no other offered product dominates (transitively)."""
    mask = as_mask(assortment, order.n)
    dominated = order.dominates[mask].any(axis=0)
    return mask & ~dominated


def undominated_set(order: PartialOrder, assortment) -> frozenset[int]:
    return frozenset(np.flatnonzero(undominated(order, assortment)).tolist())


def cover_relations(order: PartialOrder) -> tuple[tuple[int, int], ...]:
    return order.covers


def minimal_elements(order: PartialOrder) -> frozenset[int]:
    return order.minimal


def best_revenue_prefix(segment: Segment, allowed: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Best revenue-ordered assortment among ``allowed`` products for a plain MNL segment.

    The unrestricted MNL optimum is a prefix of the products sorted by
    revenue.  Ties between prefixes of equal revenue resolve to the larger
    one, which keeps every product the customer is indifferent about.
    """
    n = segment.n
    allowed = np.ones(n, dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)
    idx = np.flatnonzero(allowed)
    idx = idx[np.lexsort((idx, -segment.r[idx]))]
    num = np.concatenate([[0.0], np.cumsum(segment.r[idx] * segment.u[idx])])
    den = segment.u0 + np.concatenate([[0.0], np.cumsum(segment.u[idx])])
    rev = num / den
    # largest prefix within a relative hair of the best value
    best = rev.max()
    k = int(np.flatnonzero(rev >= best - 1e-12 * max(1.0, abs(best)))[-1])
    mask = np.zeros(n, dtype=bool)
    mask[idx[:k]] = True
    return mask, float(rev[k])
