"""Problem data for quick-commerce assortment planning.

Products are indexed ``0..n-1`` everywhere inside the library.  The JSON
format (see :func:`write_instance`) uses 1-based product ids, matching the
way assortments are usually written down by hand.

Segment ``0`` is the offline store; segments ``1..m`` are online customer
types.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import networkx as nx
import numpy as np

#: tolerance on the arrival-probability sum
ALPHA_SUM_TOL = 1e-12

# Root spawn keys for the generator stages; each stage derives its own
# substreams from ``SeedSequence(seed, spawn_key=(stage,))``.
_STAGE_SYNTHETIC = 0
_STAGE_ORDERS = 1

DOMINATING_WIDTH = 6


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Segment:
    """One customer type: arrival probability, no-purchase weight, revenues and weights."""

    index: int
    alpha: float
    u0: float
    r: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _frozen_array(self.r))
        object.__setattr__(self, "u", _frozen_array(self.u))

    @property
    def n(self) -> int:
        return len(self.r)

    def attraction(self, mask: np.ndarray) -> float:
        """``u0 + sum of weights`` over the products selected by ``mask``."""
        return float(self.u0 + self.u[mask].sum())

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "u0": self.u0, "r": self.r.tolist(), "u": self.u.tolist()}


@dataclass(frozen=True, eq=False)
class PartialOrder:
    """Dominance relation of a two-stage Luce segment.

    An arc ``(a, b)`` means product ``a`` dominates ``b``: whenever both are
    offered, ``b`` is discarded before the logit choice.  Arcs need not be
    transitively closed; every derived view works on the closure.
    """

    n: int
    arcs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple((int(a), int(b)) for a, b in self.arcs))

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.arcs)
        return g

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.graph)

    @cached_property
    def dominates(self) -> np.ndarray:
        """Boolean matrix ``D[a, b]``: ``a`` strictly dominates ``b`` (transitive)."""
        d = np.zeros((self.n, self.n), dtype=bool)
        for a in range(self.n):
            for b in nx.descendants(self.graph, a):
                d[a, b] = True
        d.setflags(write=False)
        return d

    @cached_property
    def covers(self) -> tuple[tuple[int, int], ...]:
        """Cover relations ``(a, b)``: ``a`` dominates ``b`` with nothing in between."""
        red = nx.transitive_reduction(self.graph)
        return tuple(sorted(red.edges()))

    @cached_property
    def minimal(self) -> frozenset[int]:
        """Products no other product dominates (isolated products included)."""
        return frozenset(int(j) for j in np.flatnonzero(~self.dominates.any(axis=0)))

    @cached_property
    def comparable_pairs(self) -> tuple[tuple[int, int], ...]:
        a, b = np.nonzero(self.dominates)
        return tuple(zip(a.tolist(), b.tolist()))

    def to_dict(self, segment: int) -> dict:
        return {"segment": segment, "arcs": [[a + 1, b + 1] for a, b in self.arcs]}


@dataclass(frozen=True, eq=False)
class OfflineConstraint:
    """Feasible offline assortments: unconstrained, ``|S| <= K``, or ``A x <= b``."""

    kind: str = "none"
    K: int | None = None
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("none", "cardinality", "linear"):
            raise ValueError(f"unknown offline constraint type {self.kind!r}")
        if self.A is not None:
            object.__setattr__(self, "A", _frozen_array(np.atleast_2d(self.A)))
            object.__setattr__(self, "b", _frozen_array(np.atleast_1d(self.b)))

    @classmethod
    def cardinality(cls, K: int) -> "OfflineConstraint":
        return cls("cardinality", K=int(K))

    @classmethod
    def linear(cls, A, b) -> "OfflineConstraint":
        return cls("linear", A=A, b=b)

    def system(self, n: int) -> tuple[np.ndarray, np.ndarray] | None:
        """The constraint as ``(A, b)`` with ``A x <= b``, or None when unconstrained."""
        if self.kind == "cardinality":
            return np.ones((1, n)), np.array([float(self.K)])
        if self.kind == "linear":
            return np.asarray(self.A), np.asarray(self.b)
        return None

    def feasible(self, mask: np.ndarray, tol: float = 1e-9) -> bool:
        mask = np.asarray(mask, dtype=float)
        sys_ = self.system(len(mask))
        if sys_ is None:
            return True
        A, b = sys_
        return bool(np.all(A @ mask <= b + tol))

    def to_dict(self) -> dict:
        if self.kind == "cardinality":
            return {"type": "cardinality", "K": self.K}
        if self.kind == "linear":
            return {"type": "linear", "A": self.A.tolist(), "b": self.b.tolist()}
        return {"type": "none"}


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    segments: tuple[Segment, ...]
    orders: dict[int, PartialOrder] = field(default_factory=dict)
    offline_constraint: OfflineConstraint = field(default_factory=OfflineConstraint)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "orders", dict(self.orders))

    @property
    def m(self) -> int:
        return len(self.segments) - 1

    @property
    def offline(self) -> Segment:
        return self.segments[0]

    @property
    def online(self) -> tuple[Segment, ...]:
        return self.segments[1:]

    @cached_property
    def alpha(self) -> np.ndarray:
        return _frozen_array([s.alpha for s in self.segments])

    @cached_property
    def R(self) -> np.ndarray:
        return _frozen_array(np.vstack([s.r for s in self.segments]))

    @cached_property
    def U(self) -> np.ndarray:
        return _frozen_array(np.vstack([s.u for s in self.segments]))

    @cached_property
    def u0(self) -> np.ndarray:
        return _frozen_array([s.u0 for s in self.segments])

    def is_luce(self, i: int) -> bool:
        return i in self.orders

    def to_dict(self) -> dict:
        d = {"n": self.n, "segments": [s.to_dict() for s in self.segments]}
        if self.orders:
            d["orders"] = [self.orders[i].to_dict(i) for i in sorted(self.orders)]
        if self.offline_constraint.kind != "none":
            d["offline_constraint"] = self.offline_constraint.to_dict()
        return d


@dataclass(frozen=True, eq=False)
class IdmInstance:
    """Offline MNL store plus online segments buying independently with probability theta."""

    base: Instance
    theta: np.ndarray
    precedence: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen_array(np.atleast_2d(self.theta)))
        object.__setattr__(self, "precedence", tuple((int(j), int(k)) for j, k in self.precedence))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    def precedence_closed(self, members: Iterable[int]) -> bool:
        s = set(members)
        return all(j in s for j, k in self.precedence if k in s)

    def online_value(self) -> np.ndarray:
        """Per-product online revenue rate ``sum_i alpha_i r_ij theta_ij``."""
        inst = self.base
        return (inst.alpha[1:, None] * inst.R[1:] * self.theta).sum(axis=0)

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d["idm"] = {
            "theta": self.theta.tolist(),
            "precedence": [[j + 1, k + 1] for j, k in self.precedence],
        }
        return d


# ---------------------------------------------------------------- validation


def validate(instance: Instance) -> list[str]:
    """Report every broken invariant of ``instance``; an empty list means valid."""
    problems: list[str] = []
    n = instance.n
    if n < 1:
        problems.append("n: must be a positive integer")
    if not instance.segments:
        problems.append("segments: need at least the offline segment")
        return problems
    for s in instance.segments:
        where = f"segments[{s.index}]"
        if len(s.r) != n or len(s.u) != n:
            problems.append(f"{where}: r and u must have length n={n}")
            continue
        if not (s.u0 > 0):
            problems.append(f"{where}.u0: no-purchase weight must be > 0")
        if np.any(s.u < 0):
            problems.append(f"{where}.u: preference weights must be >= 0")
        if not (s.alpha >= 0):
            problems.append(f"{where}.alpha: arrival probability must be >= 0")
        if not (np.all(np.isfinite(s.r)) and np.all(np.isfinite(s.u))):
            problems.append(f"{where}: non-finite revenue or weight")
    total = float(sum(s.alpha for s in instance.segments))
    if abs(total - 1.0) > ALPHA_SUM_TOL:
        problems.append(f"alpha: arrival probabilities sum != 1 (sum={total!r})")
    for i, order in instance.orders.items():
        where = f"orders[segment={i}]"
        if not 1 <= i <= instance.m:
            problems.append(f"{where}: orders attach to online segments 1..m only")
        if order.n != n:
            problems.append(f"{where}: order size {order.n} != n={n}")
        bad = [(a, b) for a, b in order.arcs if not (0 <= a < n and 0 <= b < n) or a == b]
        if bad:
            problems.append(f"{where}: arcs reference invalid products {bad}")
            continue
        if not order.is_acyclic():
            problems.append(f"{where}: partial order cyclic")
    oc = instance.offline_constraint
    if oc.kind == "cardinality":
        if oc.K is None or oc.K < 1 or oc.K > n:
            problems.append("offline_constraint.K: cardinality must satisfy 1 <= K <= n")
    elif oc.kind == "linear":
        if oc.A is None or oc.A.shape[1] != n or oc.A.shape[0] != len(oc.b):
            problems.append("offline_constraint: linear system shape mismatch")
        elif not (np.all(np.isfinite(oc.A)) and np.all(np.isfinite(oc.b))):
            problems.append("offline_constraint: linear system has non-finite entries")
    return problems


def validate_idm(idm: IdmInstance) -> list[str]:
    problems = validate(idm.base)
    if idm.theta.shape != (idm.m, idm.n):
        problems.append(f"idm.theta: expected shape {(idm.m, idm.n)}, got {idm.theta.shape}")
    elif np.any(idm.theta <= 0):
        problems.append("idm.theta: purchase probabilities must be > 0")
    g = nx.DiGraph(list(idm.precedence))
    if any(not (0 <= a < idm.n and 0 <= b < idm.n) for a, b in idm.precedence):
        problems.append("idm.precedence: arc references invalid product")
    elif g.number_of_nodes() and not nx.is_directed_acyclic_graph(g):
        problems.append("idm.precedence: cycle forces its products to be offered together")
    return problems


# ---------------------------------------------------------------- generation


def _stage_streams(seed: int, stage: int, count: int) -> list[np.random.Generator]:
    """``count`` independent Philox generators for one generator stage."""
    root = np.random.SeedSequence(seed, spawn_key=(stage,))
    return [np.random.Generator(np.random.Philox(s)) for s in root.spawn(count)]


def generate_synthetic(n: int, m: int, alpha0: float, u_on0: float, seed: int) -> Instance:
    """Random instance with uniform prices and weights and one favorite per online segment.

    Offline prices ~ U(10, 20).  The first ``ceil(m/2)`` online segments are
    the regular group and pay offline prices; the rest are VIP and pay those
    prices times an independent U(0.8, 1) factor.  Offline weights ~ U(0, 1);
    every online segment gets a distinct favourite product of weight exactly
    1, other weights ~ U(0, 1).

    Streams: 0 offline prices, 1 offline weights, 2 favourites, then one
    stream per online segment (its discounts and weights).
    """
    if m < 1 or n < m:
        raise ValueError(f"cannot assign unique favorites: need n >= m >= 1, got n={n}, m={m}")
    if not 0.0 <= alpha0 <= 1.0:
        raise ValueError("alpha0 must lie in [0, 1]")
    if not u_on0 > 0:
        raise ValueError("u_on0 must be positive")
    streams = _stage_streams(seed, _STAGE_SYNTHETIC, 3 + m)
    price = streams[0].uniform(10.0, 20.0, n)
    w_off = streams[1].uniform(0.0, 1.0, n)
    favourites = streams[2].permutation(n)[:m]
    n_regular = math.ceil(m / 2)
    segs = [Segment(0, alpha0, 1.0, price, w_off)]
    for i in range(1, m + 1):
        rng = streams[2 + i]
        discount = rng.uniform(0.8, 1.0, n)
        r = price if i <= n_regular else price * discount
        w = rng.uniform(0.0, 1.0, n)
        w[favourites[i - 1]] = 1.0
        segs.append(Segment(i, (1.0 - alpha0) / m, float(u_on0), r, w))
    return Instance(n, tuple(segs))


def generate_partial_orders(n: int, m: int, seed: int, width: int = DOMINATING_WIDTH) -> list[PartialOrder]:
    """Random dominance DAGs, one per online segment.

    ``s = floor(n/4)`` products take part, in random order ``V_1..V_s``.  For
    ``v = 1..s-width`` product ``V_v`` dominates ``k`` products drawn from its
    next ``width`` successors, ``k ~ U[1, l]`` for ``v < width`` and ``U[0, l]``
    otherwise, ``l = floor(width/2)``.  With ``s <= width`` the loop is empty
    and the order has no arcs.
    """
    if n < 4:
        raise ValueError("partial-order generation needs n >= 4")
    s = int(math.floor(0.25 * n))
    l = width // 2
    orders = []
    for rng in _stage_streams(seed, _STAGE_ORDERS, m):
        V = rng.permutation(n)[:s]
        arcs = []
        for v in range(1, s - width + 1):
            k = int(rng.integers(1, l, endpoint=True)) if v < width else int(rng.integers(0, l, endpoint=True))
            window = V[v : v + width]  # V_{v+1} .. V_{v+w} in 1-based terms
            for succ in rng.choice(window, size=k, replace=False):
                arcs.append((int(V[v - 1]), int(succ)))
        orders.append(PartialOrder(n, tuple(arcs)))
    return orders


def random_order(n: int, seed: int, density: float = 0.3) -> PartialOrder:
    """Random dominance DAG on all ``n`` products (for small-instance testing).

    The width-6 generator above leaves orders empty below ``n = 28``, so small
    checks use this one: each pair of a random permutation gets an arc from
    the earlier to the later product with probability ``density``.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(_STAGE_ORDERS, 1))))
    perm = rng.permutation(n)
    keep = rng.random((n, n)) < density
    arcs = [(int(perm[a]), int(perm[b])) for a in range(n) for b in range(a + 1, n) if keep[a, b]]
    return PartialOrder(n, tuple(arcs))


def with_orders(instance: Instance, orders: Sequence[PartialOrder]) -> Instance:
    """Attach one order per online segment (segment ``i`` gets ``orders[i-1]``)."""
    return Instance(
        instance.n,
        instance.segments,
        {i + 1: o for i, o in enumerate(orders)},
        instance.offline_constraint,
    )


def with_offline_constraint(instance: Instance, constraint: OfflineConstraint) -> Instance:
    return Instance(instance.n, instance.segments, instance.orders, constraint)


def from_arrays(alpha, u0, R, U, orders=None, offline_constraint=None) -> Instance:
    """Build an instance from per-segment arrays (row 0 offline)."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    u0 = np.broadcast_to(np.asarray(u0, dtype=float), (R.shape[0],))
    segs = tuple(Segment(i, float(alpha[i]), float(u0[i]), R[i], U[i]) for i in range(R.shape[0]))
    return Instance(R.shape[1], segs, dict(orders or {}), offline_constraint or OfflineConstraint())


# ---------------------------------------------------------------- JSON


class InstanceFormatError(ValueError):
    """Malformed instance document; the message carries the JSON location."""


_NUM = {"type": "number"}
_ARC = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2}

INSTANCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n", "segments"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "segments": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["alpha", "u0", "r", "u"],
                "properties": {
                    "alpha": _NUM,
                    "u0": _NUM,
                    "r": {"type": "array", "items": _NUM},
                    "u": {"type": "array", "items": _NUM},
                },
            },
        },
        "orders": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["segment", "arcs"],
                "properties": {
                    "segment": {"type": "integer", "minimum": 1},
                    "arcs": {"type": "array", "items": _ARC},
                },
            },
        },
        "offline_constraint": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": ["none", "cardinality", "linear"]},
                "K": {"type": "integer", "minimum": 1},
                "A": {"type": "array", "items": {"type": "array", "items": _NUM}},
                "b": {"type": "array", "items": _NUM},
            },
        },
        "idm": {
            "type": "object",
            "additionalProperties": False,
            "required": ["theta"],
            "properties": {
                "theta": {"type": "array", "items": {"type": "array", "items": _NUM}},
                "precedence": {"type": "array", "items": _ARC},
            },
        },
    },
}


def _location(path) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


def instance_from_dict(doc: dict) -> Instance | IdmInstance:
    """Parse a schema-conforming document; returns an IdmInstance when ``idm`` is present."""
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InstanceFormatError(f"{_location(exc.absolute_path)}: {exc.message}") from None
    n = doc["n"]
    segs = []
    for i, s in enumerate(doc["segments"]):
        for key in ("r", "u"):
            if len(s[key]) != n:
                raise InstanceFormatError(f"$.segments[{i}].{key}: expected {n} entries, got {len(s[key])}")
        segs.append(Segment(i, float(s["alpha"]), float(s["u0"]), s["r"], s["u"]))
    m = len(segs) - 1
    orders = {}
    for k, o in enumerate(doc.get("orders", [])):
        if o["segment"] > m:
            raise InstanceFormatError(f"$.orders[{k}].segment: no online segment {o['segment']}")
        for t, (a, b) in enumerate(o["arcs"]):
            if a > n or b > n:
                raise InstanceFormatError(f"$.orders[{k}].arcs[{t}]: product id out of range 1..{n}")
        orders[o["segment"]] = PartialOrder(n, tuple((a - 1, b - 1) for a, b in o["arcs"]))
    oc_doc = doc.get("offline_constraint", {"type": "none"})
    kind = oc_doc["type"]
    if kind == "cardinality":
        if "K" not in oc_doc:
            raise InstanceFormatError("$.offline_constraint.K: required for cardinality")
        oc = OfflineConstraint.cardinality(oc_doc["K"])
    elif kind == "linear":
        if "A" not in oc_doc or "b" not in oc_doc:
            raise InstanceFormatError("$.offline_constraint: linear type needs A and b")
        if any(len(row) != n for row in oc_doc["A"]) or len(oc_doc["A"]) != len(oc_doc["b"]):
            raise InstanceFormatError("$.offline_constraint.A: shape must be len(b) x n")
        oc = OfflineConstraint.linear(oc_doc["A"], oc_doc["b"])
    else:
        oc = OfflineConstraint()
    inst = Instance(n, tuple(segs), orders, oc)
    if "idm" not in doc:
        return inst
    idm = doc["idm"]
    theta = np.asarray(idm["theta"], dtype=float)
    if theta.shape != (m, n):
        raise InstanceFormatError(f"$.idm.theta: expected shape {m}x{n}")
    prec = []
    for t, (j, k) in enumerate(idm.get("precedence", [])):
        if j > n or k > n:
            raise InstanceFormatError(f"$.idm.precedence[{t}]: product id out of range 1..{n}")
        prec.append((j - 1, k - 1))
    return IdmInstance(inst, theta, tuple(prec))


def read_instance(path) -> Instance | IdmInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def write_instance(instance: Instance | IdmInstance, path) -> None:
    # json writes floats with repr(), which round-trips exactly
    Path(path).write_text(json.dumps(instance.to_dict(), indent=1) + "\n")
