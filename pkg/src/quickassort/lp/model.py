"""Mutable container for mixed-binary linear models (maximization)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

INF = math.inf
SENSES = ("<=", ">=", "==")


class ModelError(ValueError):
    pass


@dataclass
class Row:
    """Sparse row ``sum coef * var  (sense)  rhs``."""

    idx: np.ndarray
    val: np.ndarray
    sense: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        self.idx = np.asarray(self.idx, dtype=np.int64)
        self.val = np.asarray(self.val, dtype=float)
        if self.sense not in SENSES:
            raise ModelError(f"row sense must be one of {SENSES}, got {self.sense!r}")
        if self.idx.shape != self.val.shape:
            raise ModelError("row index and value arrays differ in length")

    @classmethod
    def from_dict(cls, coefs: Mapping[int, float], sense: str, rhs: float, name: str = "") -> "Row":
        return cls(np.fromiter(coefs.keys(), np.int64), np.fromiter(coefs.values(), float), sense, rhs, name)

    def bounds(self) -> tuple[float, float]:
        if self.sense == "<=":
            return -INF, self.rhs
        if self.sense == ">=":
            return self.rhs, INF
        return self.rhs, self.rhs

    def activity(self, x: np.ndarray) -> float:
        return float(self.val @ x[self.idx])


@dataclass
class LinearModel:
    names: list[str] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    binary: list[bool] = field(default_factory=list)
    obj: list[float] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, binary: bool = False, obj: float = 0.0) -> int:
        if lb > ub:
            raise ModelError(f"variable {name}: lower bound {lb} exceeds upper bound {ub}")
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.binary.append(bool(binary))
        self.obj.append(float(obj))
        return len(self.names) - 1

    def add_row(self, row: Row) -> int:
        if row.idx.size and (row.idx.min() < 0 or row.idx.max() >= self.num_vars):
            raise ModelError(f"row {row.name or len(self.rows)} references an unknown variable")
        self.rows.append(row)
        return len(self.rows) - 1

    def add_rows(self, rows: Iterable[Row]) -> list[int]:
        return [self.add_row(r) for r in rows]

    def set_objective(self, var: int, coef: float) -> None:
        self.obj[var] = float(coef)

    def copy(self) -> "LinearModel":
        return LinearModel(
            list(self.names), list(self.lb), list(self.ub), list(self.binary), list(self.obj), list(self.rows)
        )

    # dense/sparse views -----------------------------------------------------

    def matrix(self) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix((0, self.num_vars))
        indptr = np.cumsum([0] + [r.idx.size for r in self.rows])
        idx = np.concatenate([r.idx for r in self.rows])
        val = np.concatenate([r.val for r in self.rows])
        return sp.csr_matrix((val, idx, indptr), shape=(self.num_rows, self.num_vars))

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        b = np.array([r.bounds() for r in self.rows], dtype=float).reshape(-1, 2)
        return b[:, 0], b[:, 1]

    def objective(self) -> np.ndarray:
        return np.asarray(self.obj, dtype=float)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lb, dtype=float), np.asarray(self.ub, dtype=float)

    def integer_vars(self) -> np.ndarray:
        return np.flatnonzero(self.binary)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest absolute row or bound violation of ``x``."""
        x = np.asarray(x, dtype=float)
        lb, ub = self.bounds()
        worst = float(max(0.0, np.max(lb - x, initial=0.0), np.max(x - ub, initial=0.0)))
        if self.rows:
            act = self.matrix() @ x
            lo, hi = self.row_bounds()
            worst = max(worst, float(np.max(lo - act, initial=0.0)), float(np.max(act - hi, initial=0.0)))
        return worst

    def permuted(self, perm: Sequence[int]) -> "LinearModel":
        """Same model with variables re-declared in order ``perm`` (new var k = old var perm[k])."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        out = LinearModel(
            [self.names[p] for p in perm],
            [self.lb[p] for p in perm],
            [self.ub[p] for p in perm],
            [self.binary[p] for p in perm],
            [self.obj[p] for p in perm],
        )
        out.rows = [Row(inv[r.idx], r.val, r.sense, r.rhs, r.name) for r in self.rows]
        return out

    # LP text format ------------------------------------------------------

    def write_lp(self, path) -> None:
        """Write the model in CPLEX LP text format (readable by common external solvers)."""

        def term(coef: float, name: str, first: bool) -> str:
            sign = "-" if coef < 0 else ("" if first else "+")
            return f"{sign} {abs(coef):.17g} {name}".strip()

        def expr(idx, val) -> str:
            parts = [term(v, self.names[i], k == 0) for k, (i, v) in enumerate(zip(idx, val)) if v != 0]
            return " ".join(parts) if parts else "0 " + self.names[0]

        obj_idx = [i for i, c in enumerate(self.obj) if c != 0]
        lines = ["Maximize", " obj: " + expr(obj_idx, [self.obj[i] for i in obj_idx]), "Subject To"]
        op = {"<=": "<=", ">=": ">=", "==": "="}
        for k, r in enumerate(self.rows):
            lines.append(f" r{k}: {expr(r.idx, r.val)} {op[r.sense]} {r.rhs:.17g}")
        lines.append("Bounds")
        for name, lo, hi in zip(self.names, self.lb, self.ub):
            lo_s = "-inf" if lo == -INF else f"{lo:.17g}"
            hi_s = "+inf" if hi == INF else f"{hi:.17g}"
            lines.append(f" {lo_s} <= {name} <= {hi_s}")
        bins = [n for n, b in zip(self.names, self.binary) if b]
        if bins:
            lines.append("Binaries")
            lines.extend(f" {n}" for n in bins)
        lines.append("End")
        Path(path).write_text("\n".join(lines) + "\n")
