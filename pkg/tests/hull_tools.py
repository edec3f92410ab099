"""Independent brute-force evaluation of the Under/Over families.

Everything here enumerates subsets directly and never calls the separation
module, so it can serve as the reference in separation and hull tests.
"""

import numpy as np
from scipy.optimize import linprog

from quickassort.instance import Segment


def random_segment(rng: np.random.Generator, n: int) -> Segment:
    return Segment(0, 1.0, float(rng.uniform(0.2, 3.0)), rng.uniform(1, 10, n), rng.uniform(0.05, 5.0, n))


def all_masks(n: int) -> np.ndarray:
    bits = np.arange(1 << n)
    return ((bits[:, None] >> np.arange(n)) & 1).astype(bool)


def vertex_points(seg: Segment) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Charnes-Cooper points of every subset: masks, y0 and y (rows aligned)."""
    masks = all_masks(seg.n)
    y0 = 1.0 / (seg.u0 + masks @ seg.u)
    return masks, y0, masks * y0[:, None]


def scaled_under(seg: Segment, j: int, xj, y0, y, S_masks: np.ndarray) -> np.ndarray:
    """``U(S+j) * (rhs - y_j)`` for every point (rows of y) and every S (rows of S_masks)."""
    y = np.atleast_2d(y)
    xj = np.broadcast_to(np.atleast_1d(np.asarray(xj, dtype=float)), (len(y),))
    inc = S_masks.copy()
    inc[:, j] = True
    U = seg.u0 + inc @ seg.u
    outside = y @ (seg.u[:, None] * ~inc.T)
    return xj[:, None] - outside - U[None, :] * y[:, [j]]


def scaled_over(seg: Segment, j: int, xj, y0, y, S_masks: np.ndarray) -> np.ndarray:
    """``U(S+j) * (y_j - rhs)`` for every point and every S (``j`` is dropped from S)."""
    y = np.atleast_2d(y)
    y0 = np.broadcast_to(np.atleast_1d(np.asarray(y0, dtype=float)), (len(y),))
    xj = np.broadcast_to(np.atleast_1d(np.asarray(xj, dtype=float)), (len(y),))
    S = S_masks.copy()
    S[:, j] = False
    su = S @ seg.u
    U = seg.u0 + seg.u[j] + su
    inside = y @ (seg.u[:, None] * S.T)
    return U[None, :] * y[:, [j]] - xj[:, None] - su[None, :] * y0[:, None] + inside


def subsets_without(n: int, j: int) -> np.ndarray:
    masks = all_masks(n)
    return masks[~masks[:, j]]


def random_y(rng: np.random.Generator, seg: Segment, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Random points of the normalized hull ``u0 y0 + u.y = 1, 0 <= y <= y0``."""
    ratio = rng.uniform(0, 1, (count, seg.n))
    ratio[rng.random((count, seg.n)) < 0.2] = 0.0
    ratio[rng.random((count, seg.n)) < 0.2] = 1.0
    y0 = 1.0 / (seg.u0 + ratio @ seg.u)
    return y0, ratio * y0[:, None]


def in_convex_hull(points: np.ndarray, target: np.ndarray) -> float:
    """Smallest L1 distance from ``target`` to the convex hull of ``points`` (rows)."""
    k, d = points.shape
    # variables: lambda (k), positive and negative residuals (d each)
    A_eq = np.zeros((d + 1, k + 2 * d))
    A_eq[:d, :k] = points.T
    A_eq[:d, k:k + d] = np.eye(d)
    A_eq[:d, k + d:] = -np.eye(d)
    A_eq[d, :k] = 1.0
    b_eq = np.concatenate([target, [1.0]])
    c = np.concatenate([np.zeros(k), np.ones(2 * d)])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)
