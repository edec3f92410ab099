"""Assortment profiles with their exact revenue."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .choice import as_mask, mnl_revenue, undominated
from .instance import Instance

OBJ_TOL = 1e-9

STATS_COLUMNS = ("instance", "method", "obj", "bound", "gap", "nodes", "cuts", "rounds", "time_s")


@dataclass
class QapSolution:
    """Offline set, one online set per segment, and the purchase probabilities they induce.

    ``choice_probs[i, j]`` is the probability that a type-``i`` customer buys
    product ``j`` (row 0 is the offline store).
    """

    offline: frozenset[int]
    online: tuple[frozenset[int], ...]
    choice_probs: np.ndarray
    objective: float
    method: str
    stats: dict = field(default_factory=dict)

    @classmethod
    def from_sets(cls, instance: Instance, offline, online: Sequence, method: str, stats: dict | None = None):
        n = instance.n
        s0 = as_mask(offline, n)
        sets = [s0]
        for i, s in enumerate(online, start=1):
            mask = as_mask(s, n)
            if instance.is_luce(i):
                mask = undominated(instance.orders[i], mask)
            sets.append(mask)
        probs = np.zeros((instance.m + 1, n))
        total = 0.0
        for i, (seg, mask) in enumerate(zip(instance.segments, sets)):
            den = seg.u0 + float(seg.u[mask].sum())
            probs[i, mask] = seg.u[mask] / den
            total += seg.alpha * mnl_revenue(seg, mask)
        return cls(
            frozenset(np.flatnonzero(s0).tolist()),
            tuple(frozenset(np.flatnonzero(m).tolist()) for m in sets[1:]),
            probs,
            total,
            method,
            dict(stats or {}),
        )

    @property
    def sets(self) -> tuple[frozenset[int], ...]:
        return (self.offline, *self.online)

    def masks(self, n: int) -> np.ndarray:
        return np.vstack([as_mask(s, n) for s in self.sets])

    def check(self, instance: Instance) -> list[str]:
        """Broken invariants of this profile for ``instance`` (empty when sound)."""
        problems = []
        n = instance.n
        if len(self.online) != instance.m:
            problems.append(f"expected {instance.m} online sets, got {len(self.online)}")
            return problems
        for i, s in enumerate(self.online, start=1):
            if not s <= self.offline:
                problems.append(f"online set {i} not contained in offline set")
            if instance.is_luce(i) and set(np.flatnonzero(undominated(instance.orders[i], as_mask(s, n)))) != set(s):
                problems.append(f"online set {i} contains dominated products")
        if not instance.offline_constraint.feasible(as_mask(self.offline, n)):
            problems.append("offline set violates the offline constraint")
        exact = sum(seg.alpha * mnl_revenue(seg, s) for seg, s in zip(instance.segments, self.sets))
        if abs(exact - self.objective) > OBJ_TOL * max(1.0, abs(exact)):
            problems.append(f"objective {self.objective!r} differs from recomputed revenue {exact!r}")
        return problems

    def to_dict(self) -> dict:
        def ids(s):
            return [j + 1 for j in sorted(s)]

        stats = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.stats.items()}
        return {
            "method": self.method,
            "objective": self.objective,
            "offline": ids(self.offline),
            "online": [ids(s) for s in self.online],
            "choice_probs": self.choice_probs.tolist(),
            "stats": stats,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    def stats_row(self, instance_id: str = "") -> dict:
        st = self.stats
        return {
            "instance": instance_id,
            "method": self.method,
            "obj": self.objective,
            "bound": st.get("bound", self.objective),
            "gap": st.get("gap", 0.0),
            "nodes": st.get("nodes", 0),
            "cuts": st.get("cuts", 0),
            "rounds": st.get("rounds", 0),
            "time_s": st.get("time_s", 0.0),
        }


def write_stats_csv(rows: Sequence[dict], path, append: bool = False) -> None:
    path = Path(path)
    new = not (append and path.exists())
    with path.open("a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=STATS_COLUMNS)
        if new:
            w.writeheader()
        w.writerows(rows)
