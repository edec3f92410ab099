"""Dense bounded-variable revised simplex.

Rows become logical variables ``s = A x`` carrying the row bounds, so every
constraint is an equality ``A x - s = 0`` and all sense information lives in
variable bounds.  The basis inverse is kept explicitly, updated by
elementary row operations after each pivot and recomputed from scratch
every ``REFACTOR_EVERY`` pivots.

Infeasible starting bases (including warm starts after rows are added) are
handled by a composite phase 1 that minimizes the total bound violation of
the basic variables; the ratio test never lets an infeasible basic variable
cross its violated bound, so the violation sum never increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LinearModel
from .result import LpResult, LpStatus

REFACTOR_EVERY = 100
FEAS_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9


@dataclass(frozen=True)
class SimplexBasis:
    """Basis in model terms so it survives row additions and bound changes."""

    basic_cols: tuple[int, ...]
    basic_rows: tuple[int, ...]
    cols_at_upper: tuple[int, ...]
    rows_at_upper: tuple[int, ...]
    num_rows: int


class DenseSimplex:
    def __init__(self, c, A, row_lo, row_hi, lb, ub, max_iter: int | None = None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.m, self.n = self.A.shape
        self.c = np.asarray(c, dtype=float)
        self.M = np.hstack([self.A, -np.eye(self.m)])
        self.L = np.concatenate([lb, row_lo]).astype(float)
        self.H = np.concatenate([ub, row_hi]).astype(float)
        self.cost = np.concatenate([-self.c, np.zeros(self.m)])
        self.max_iter = max_iter or 20000 + 100 * (self.m + self.n)
        self.tol = FEAS_TOL * (1.0 + np.where(np.isfinite(self.L), np.abs(self.L), 0.0)
                               + np.where(np.isfinite(self.H), np.abs(self.H), 0.0))

    # --------------------------------------------------------------- setup

    def _resting_value(self, k: int, upper: bool) -> float:
        lo, hi = self.L[k], self.H[k]
        if upper and np.isfinite(hi):
            return hi
        if np.isfinite(lo):
            return lo
        if np.isfinite(hi):
            return hi
        return 0.0

    def _initial(self, warm: SimplexBasis | None):
        N = self.n + self.m
        basic = list(range(self.n, N))
        upper = np.zeros(N, dtype=bool)
        if warm is not None:
            rows = [r for r in warm.basic_rows if r < self.m]
            cand = list(warm.basic_cols) + [self.n + r for r in rows]
            # rows added since the basis was taken start with their logicals basic
            fresh = [self.n + r for r in range(warm.num_rows, self.m)]
            cand = cand + fresh
            if len(cand) == self.m:
                basic = cand
                upper[list(warm.cols_at_upper)] = True
                upper[[self.n + r for r in warm.rows_at_upper if r < self.m]] = True
        z = np.array([self._resting_value(k, upper[k]) for k in range(N)])
        return basic, z

    # --------------------------------------------------------------- solve

    def solve(self, warm: SimplexBasis | None = None) -> LpResult:
        basic, z = self._initial(warm)
        try:
            Binv = np.linalg.inv(self.M[:, basic])
        except np.linalg.LinAlgError:
            basic, z = self._initial(None)
            Binv = np.linalg.inv(self.M[:, basic])
        N = self.n + self.m
        is_basic = np.zeros(N, dtype=bool)
        is_basic[basic] = True
        basic = np.array(basic)
        since_refactor = 0
        stalled = 0
        bland = False
        last_measure = np.inf
        for it in range(1, self.max_iter + 1):
            if since_refactor >= REFACTOR_EVERY:
                try:
                    Binv = np.linalg.inv(self.M[:, basic])
                except np.linalg.LinAlgError:
                    return LpResult(LpStatus.NUMERICAL_FAILURE, iterations=it)
                since_refactor = 0
            zn = np.where(is_basic, 0.0, z)
            zB = -Binv @ (self.M @ zn)
            z[basic] = zB
            Lb, Hb, tb = self.L[basic], self.H[basic], self.tol[basic]
            below = zB < Lb - tb
            above = zB > Hb + tb
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                cost = np.zeros(N)
                measure = float(np.sum(np.where(below, Lb - zB, 0.0)) + np.sum(np.where(above, zB - Hb, 0.0)))
            else:
                cB = self.cost[basic]
                cost = self.cost
                measure = float(self.cost @ z)
            if measure < last_measure - 1e-12 * max(1.0, abs(measure)):
                stalled = 0
            else:
                stalled += 1
                if stalled > 50 * (self.m + self.n):
                    bland = True
            last_measure = measure

            d = cost - (cB @ Binv) @ self.M
            can_inc = ~is_basic & (z < self.H)
            can_dec = ~is_basic & (z > self.L)
            score = np.where(can_inc & (d < -DUAL_TOL), -d, 0.0)
            score = np.maximum(score, np.where(can_dec & (d > DUAL_TOL), d, 0.0))
            cands = np.flatnonzero(score > 0)
            if cands.size == 0:
                if since_refactor:
                    Binv = np.linalg.inv(self.M[:, basic])
                    since_refactor = 0
                    continue
                if phase1:
                    return LpResult(LpStatus.INFEASIBLE, iterations=it)
                return self._finish(z, basic, is_basic, it)
            q = int(cands[0]) if bland else int(cands[np.argmax(score[cands])])
            direction = 1.0 if (d[q] < 0 and can_inc[q]) else -1.0

            alpha = Binv @ self.M[:, q]
            dz = -direction * alpha
            t_best = self.H[q] - self.L[q]
            leave = -1
            leave_val = 0.0
            ratios = np.full(self.m, np.inf)
            targets = np.zeros(self.m)
            down = dz < -PIVOT_TOL
            up = dz > PIVOT_TOL
            # decreasing basics stop at lower bound, or at the violated upper bound
            dec_tgt = np.where(above, Hb, Lb)
            dec_ok = down & ~below & np.isfinite(dec_tgt)
            ratios[dec_ok] = (zB[dec_ok] - dec_tgt[dec_ok]) / -dz[dec_ok]
            targets[dec_ok] = dec_tgt[dec_ok]
            inc_tgt = np.where(below, Lb, Hb)
            inc_ok = up & ~above & np.isfinite(inc_tgt)
            ratios[inc_ok] = (inc_tgt[inc_ok] - zB[inc_ok]) / dz[inc_ok]
            targets[inc_ok] = inc_tgt[inc_ok]
            ratios = np.maximum(ratios, 0.0)
            r_min = ratios.min() if self.m else np.inf
            if r_min < t_best:
                near = np.flatnonzero(ratios <= r_min + 1e-12)
                if bland:
                    r = int(near[np.argmin(basic[near])])
                else:
                    r = int(near[np.argmax(np.abs(alpha[near]))])
                t_best = ratios[r]
                leave = r
                leave_val = targets[r]
            if not np.isfinite(t_best):
                if phase1:
                    return LpResult(LpStatus.NUMERICAL_FAILURE, iterations=it)
                return LpResult(LpStatus.UNBOUNDED, iterations=it)
            if leave < 0:
                z[q] = self.H[q] if direction > 0 else self.L[q]
                continue
            z[q] = z[q] + direction * t_best
            out = basic[leave]
            z[out] = leave_val
            is_basic[out] = False
            is_basic[q] = True
            basic[leave] = q
            piv = alpha[leave]
            row = Binv[leave] / piv
            Binv -= np.outer(alpha, row)
            Binv[leave] = row
            since_refactor += 1
        return LpResult(LpStatus.NUMERICAL_FAILURE, iterations=self.max_iter)

    def _finish(self, z, basic, is_basic, it) -> LpResult:
        x = z[: self.n].copy()
        n = self.n
        nonbasic_upper = np.flatnonzero(~is_basic & np.isfinite(self.H) & (z == self.H) & (self.H != self.L))
        basis = SimplexBasis(
            tuple(int(k) for k in basic if k < n),
            tuple(int(k - n) for k in basic if k >= n),
            tuple(int(k) for k in nonbasic_upper if k < n),
            tuple(int(k - n) for k in nonbasic_upper if k >= n),
            self.m,
        )
        return LpResult(LpStatus.OPTIMAL, x, float(self.c @ x), basis, it)


def solve_lp(model: LinearModel, warm_basis: SimplexBasis | None = None, lb=None, ub=None) -> LpResult:
    """Solve the continuous relaxation of ``model`` (binaries relaxed to [0, 1]).

    ``lb``/``ub`` override the model's variable bounds (used by branch and bound).
    """
    if model.num_rows:
        A = model.matrix().toarray()
        # an empty row only constrains its own bounds; drop it from the basis
        keep = np.flatnonzero(np.abs(A).sum(axis=1) > 0)
        lo, hi = model.row_bounds()
        empty = np.setdiff1d(np.arange(model.num_rows), keep)
        if np.any(lo[empty] > FEAS_TOL) or np.any(hi[empty] < -FEAS_TOL):
            return LpResult(LpStatus.INFEASIBLE)
    else:
        A = np.zeros((0, model.num_vars))
        lo = hi = np.zeros(0)
        keep = np.arange(0)
    c = model.objective()
    mlb, mub = model.bounds()
    lb = mlb if lb is None else np.asarray(lb, dtype=float)
    ub = mub if ub is None else np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        return LpResult(LpStatus.INFEASIBLE)
    if keep.size < model.num_rows:
        # empty rows were removed, so basis row ids no longer line up
        warm_basis = None
    solver = DenseSimplex(c, A[keep], lo[keep], hi[keep], lb, ub)
    return solver.solve(warm_basis)


class SimplexSession:
    """Incremental LP session backed by :class:`DenseSimplex` with basis warm starts."""

    def __init__(self, model: LinearModel):
        self.model = model.copy()
        self.lb, self.ub = (a.copy() for a in self.model.bounds())
        self.basis: SimplexBasis | None = None
        self.iterations = 0

    def add_rows(self, rows) -> None:
        self.model.add_rows(rows)

    def set_bounds(self, idx, lb, ub) -> None:
        self.lb[idx] = lb
        self.ub[idx] = ub

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lb.copy(), self.ub.copy()

    def solve(self) -> LpResult:
        res = solve_lp(self.model, self.basis, self.lb, self.ub)
        if res.status is LpStatus.NUMERICAL_FAILURE and self.basis is not None:
            res = solve_lp(self.model, None, self.lb, self.ub)
        if res.optimal:
            self.basis = res.basis
        self.iterations += res.iterations
        return res
