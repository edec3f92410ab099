"""LP sessions on the HiGHS dual simplex (continuous relaxations only).

Branching, cut management and incumbent logic stay in this package; HiGHS is
used purely as the relaxation engine.  Row additions and bound changes keep
the internal basis, so re-solves warm start.
"""

from __future__ import annotations

import highspy
import numpy as np

from .model import LinearModel, Row
from .result import LpResult, LpStatus

_INF = highspy.kHighsInf


def _finite(a: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(a, dtype=float), -_INF, _INF)


class HighsSession:
    def __init__(self, model: LinearModel, threads: int = 1):
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("threads", threads)
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("presolve", "off")
        h.setOptionValue("primal_feasibility_tolerance", 1e-9)
        h.setOptionValue("dual_feasibility_tolerance", 1e-9)
        h.setOptionValue("random_seed", 0)
        self.h = h
        self.num_vars = model.num_vars
        lb, ub = model.bounds()
        self.lb, self.ub = lb.copy(), ub.copy()
        h.addCols(self.num_vars, model.objective(), _finite(lb), _finite(ub), 0,
                  np.zeros(0, np.int32), np.zeros(0, np.int32), np.zeros(0))
        h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        self.num_rows = 0
        self.add_rows(model.rows)
        self.iterations = 0

    def add_rows(self, rows: list[Row]) -> None:
        if not rows:
            return
        lo = np.empty(len(rows))
        hi = np.empty(len(rows))
        starts = np.zeros(len(rows), dtype=np.int32)
        pos = 0
        for k, r in enumerate(rows):
            lo[k], hi[k] = r.bounds()
            starts[k] = pos
            pos += r.idx.size
        idx = np.concatenate([r.idx for r in rows]).astype(np.int32)
        val = np.concatenate([r.val for r in rows])
        if idx.size and (idx.min() < 0 or idx.max() >= self.num_vars):
            raise ValueError("row references an unknown variable")
        self.h.addRows(len(rows), _finite(lo), _finite(hi), idx.size, starts, idx, val)
        self.num_rows += len(rows)

    def set_bounds(self, idx, lb, ub) -> None:
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int32))
        lb = np.broadcast_to(np.asarray(lb, dtype=float), idx.shape).copy()
        ub = np.broadcast_to(np.asarray(ub, dtype=float), idx.shape).copy()
        self.lb[idx] = lb
        self.ub[idx] = ub
        self.h.changeColsBounds(idx.size, idx, _finite(lb), _finite(ub))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lb.copy(), self.ub.copy()

    def solve(self) -> LpResult:
        h = self.h
        h.run()
        status = h.getModelStatus()
        info = h.getInfo()
        its = int(info.simplex_iteration_count)
        self.iterations += its
        if status == highspy.HighsModelStatus.kOptimal:
            x = np.array(h.getSolution().col_value)
            return LpResult(LpStatus.OPTIMAL, x, float(info.objective_function_value), None, its)
        if status == highspy.HighsModelStatus.kInfeasible:
            return LpResult(LpStatus.INFEASIBLE, iterations=its)
        if status in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
            return LpResult(LpStatus.UNBOUNDED, iterations=its)
        # retry cold once before giving up
        h.clearSolver()
        h.run()
        if h.getModelStatus() == highspy.HighsModelStatus.kOptimal:
            x = np.array(h.getSolution().col_value)
            return LpResult(LpStatus.OPTIMAL, x, float(h.getInfo().objective_function_value), None, its)
        return LpResult(LpStatus.NUMERICAL_FAILURE, iterations=its)
