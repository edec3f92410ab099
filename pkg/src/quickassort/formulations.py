"""Linear models for the assortment problem and its subproblems.

Every model works in Charnes-Cooper coordinates: for segment ``i`` offered
set ``S``, ``y_i0 = 1/(u_i0 + sum_{j in S} u_ij)`` and ``y_ij = y_i0`` for
``j in S`` (zero otherwise), so ``u_ij * y_ij`` is a choice probability and
revenue is linear in ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instance import IdmInstance, Instance, PartialOrder, Segment, validate
from .lp.model import INF, LinearModel, Row

TANGENT_TOL = 1e-7


@dataclass
class VarMap:
    """Column indices of the model variables.

    ``y0[i]`` and ``y[i, j]`` index segment ``i``'s no-purchase and product
    coordinates; ``z[i]`` holds the chain auxiliaries of a two-stage Luce
    segment; ``xs[i, j]`` are the per-segment binaries of the big-M model.
    """

    x: np.ndarray
    y0: np.ndarray
    y: np.ndarray
    z: dict[int, np.ndarray] = field(default_factory=dict)
    xs: np.ndarray | None = None


def _alpha(seg: Segment, extra: float) -> float:
    return 1.0 / (seg.u0 + extra)


def _row(pairs, sense, rhs, name="") -> Row:
    idx, val = zip(*pairs) if pairs else ((), ())
    return Row(np.array(idx, dtype=np.int64), np.array(val, dtype=float), sense, float(rhs), name)


def _add_segment_vars(model: LinearModel, i: int, seg: Segment, weight: float) -> tuple[int, np.ndarray]:
    y0 = model.add_var(f"y{i}_0", lb=_alpha(seg, float(seg.u.sum())), ub=1.0 / seg.u0)
    y = np.array([
        model.add_var(f"y{i}_{j + 1}", lb=0.0, ub=_alpha(seg, seg.u[j]), obj=weight * seg.r[j] * seg.u[j])
        for j in range(seg.n)
    ])
    return y0, y


def _normalization(seg: Segment, y0: int, y: np.ndarray, name: str) -> Row:
    return Row(np.concatenate([[y0], y]), np.concatenate([[seg.u0], seg.u]), "==", 1.0, name)


def chain_rows(order: PartialOrder, y: np.ndarray, y0: int, z: np.ndarray, tag: str = "") -> list[Row]:
    """Extended description of the scaled chain polytope of a dominance order.

    Orientation: for a dominance arc ``a -> b`` (``a`` dominates ``b``), the
    auxiliary ``z`` grows along the arc, ``z_a <= z_b``.  Each ``z_b`` bounds
    the mass of any chain ending at ``b``, so the feasible ``y / y0`` are
    exactly the convex combinations of antichains.
    """
    rows = []
    for a in range(order.n):
        rows.append(_row([(z[a], 1.0), (y0, -1.0)], "<=", 0.0, f"chain_top{tag}_{a}"))
    for a, b in order.comparable_pairs:
        rows.append(_row([(z[a], 1.0), (z[b], -1.0)], "<=", 0.0, f"chain_le{tag}_{a}_{b}"))
    for a, b in order.covers:
        rows.append(_row([(y[b], 1.0), (z[b], -1.0), (z[a], 1.0)], "<=", 0.0, f"chain_cover{tag}_{a}_{b}"))
    for a in sorted(order.minimal):
        rows.append(_row([(y[a], 1.0), (z[a], -1.0)], "==", 0.0, f"chain_min{tag}_{a}"))
    return rows


def build_chain_constraints(model: LinearModel, vm: VarMap, i: int, order: PartialOrder) -> list[Row]:
    """Create segment ``i``'s chain auxiliaries in ``model`` and return its chain rows."""
    z = np.array([model.add_var(f"z{i}_{j + 1}", lb=0.0, ub=INF) for j in range(order.n)])
    vm.z[i] = z
    return chain_rows(order, vm.y[i], int(vm.y0[i]), z, tag=str(i))


def _hull_rows(model: LinearModel, vm: VarMap, inst: Instance, i: int) -> list[Row]:
    if inst.is_luce(i):
        return build_chain_constraints(model, vm, i, inst.orders[i])
    y0 = int(vm.y0[i])
    return [_row([(int(vm.y[i, j]), 1.0), (y0, -1.0)], "<=", 0.0, f"hull{i}_{j}") for j in range(inst.n)]


def offline_rows(inst: Instance, vm: VarMap) -> list[Row]:
    """Offline constraint on ``x`` and its homogenized copy on the offline ``y``."""
    sys_ = inst.offline_constraint.system(inst.n)
    if sys_ is None:
        return []
    A, b = sys_
    rows = []
    for k in range(A.shape[0]):
        nz = np.flatnonzero(A[k])
        rows.append(Row(vm.x[nz], A[k, nz], "<=", b[k], f"offline{k}"))
        rows.append(Row(np.concatenate([vm.y[0, nz], [vm.y0[0]]]), np.concatenate([A[k, nz], [-b[k]]]),
                        "<=", 0.0, f"offline_h{k}"))
    return rows


def tangent_row(seg: Segment, i: int, vm: VarMap, w_bar: float) -> Row:
    """Supporting line of ``1/w`` at ``w_bar``: ``y_i0 >= 2/w_bar - w/w_bar^2`` with ``w = u_i0 + u_i . x``."""
    inv2 = 1.0 / (w_bar * w_bar)
    nz = np.flatnonzero(seg.u)
    return Row(
        np.concatenate([[vm.y0[i]], vm.x[nz]]),
        np.concatenate([[1.0], seg.u[nz] * inv2]),
        ">=",
        2.0 / w_bar - seg.u0 * inv2,
        f"tangent{i}_{w_bar:.12g}",
    )


def tangent_violation(seg: Segment, y0: float, x: np.ndarray) -> tuple[float, float]:
    """Violation of ``y_i0 >= 1/w(x)`` and the point ``w(x)`` where a new tangent would touch."""
    w = seg.u0 + float(seg.u @ x)
    return 1.0 / w - y0, w


def build_ch0(instance: Instance, tangents: bool = True) -> tuple[LinearModel, VarMap]:
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    n = instance.n
    model = LinearModel()
    x = np.array([model.add_var(f"x{j + 1}", binary=True) for j in range(n)])
    y0s, ys = [], []
    for i, seg in enumerate(instance.segments):
        y0, y = _add_segment_vars(model, i, seg, seg.alpha)
        y0s.append(y0)
        ys.append(y)
    vm = VarMap(x, np.array(y0s), np.vstack(ys))
    rows = offline_rows(instance, vm)
    off = instance.offline
    a_all, a_none = _alpha(off, float(off.u.sum())), 1.0 / off.u0
    for j in range(n):
        y0j, y00 = int(vm.y[0, j]), int(vm.y0[0])
        rows.append(_row([(y0j, 1.0), (int(x[j]), -a_all)], ">=", 0.0, f"mcc_lo_all_{j}"))
        rows.append(_row([(y0j, 1.0), (int(x[j]), -a_none), (y00, -1.0)], ">=", -a_none, f"mcc_lo_none_{j}"))
    for i, seg in enumerate(instance.segments):
        rows.append(_normalization(seg, int(vm.y0[i]), vm.y[i], f"norm{i}"))
        rows.extend(_hull_rows(model, vm, instance, i))
        total = float(seg.u.sum())
        for j in range(n):
            yij, y0 = int(vm.y[i, j]), int(vm.y0[i])
            a_j = _alpha(seg, seg.u[j])
            a_rest = _alpha(seg, total - seg.u[j])
            rows.append(_row([(yij, 1.0), (int(x[j]), -a_j)], "<=", 0.0, f"mcc_up_one{i}_{j}"))
            rows.append(_row([(yij, 1.0), (int(x[j]), -a_rest), (y0, -1.0)], "<=", -a_rest, f"mcc_up_rest{i}_{j}"))
        if tangents:
            rows.append(tangent_row(seg, i, vm, seg.u0))
            if total > 0:
                rows.append(tangent_row(seg, i, vm, seg.u0 + total))
    model.add_rows(rows)
    return model, vm


def build_milp_bigm(instance: Instance) -> tuple[LinearModel, VarMap]:
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    n = instance.n
    model = LinearModel()
    xs = np.array([[model.add_var(f"x{i}_{j + 1}", binary=True) for j in range(n)]
                   for i in range(instance.m + 1)])
    y0s, ys = [], []
    for i, seg in enumerate(instance.segments):
        y0, y = _add_segment_vars(model, i, seg, seg.alpha)
        y0s.append(y0)
        ys.append(y)
    vm = VarMap(xs[0], np.array(y0s), np.vstack(ys), xs=xs)
    rows = []
    sys_ = instance.offline_constraint.system(n)
    if sys_ is not None:
        A, b = sys_
        for k in range(A.shape[0]):
            nz = np.flatnonzero(A[k])
            rows.append(Row(xs[0, nz], A[k, nz], "<=", b[k], f"offline{k}"))
    for i, seg in enumerate(instance.segments):
        y0 = int(vm.y0[i])
        rows.append(_normalization(seg, y0, vm.y[i], f"norm{i}"))
        for j in range(n):
            yij, xij = int(vm.y[i, j]), int(xs[i, j])
            rows.append(_row([(yij, 1.0), (y0, -1.0)], "<=", 0.0, f"hull{i}_{j}"))
            rows.append(_row([(yij, seg.u0), (xij, -1.0)], "<=", 0.0, f"on{i}_{j}"))
            rows.append(_row([(y0, seg.u0), (yij, -seg.u0), (xij, 1.0)], "<=", 1.0, f"off{i}_{j}"))
            if i > 0:
                rows.append(_row([(int(xs[0, j]), 1.0), (xij, -1.0)], ">=", 0.0, f"link{i}_{j}"))
        if instance.is_luce(i):
            rows.extend(build_chain_constraints(model, vm, i, instance.orders[i]))
    model.add_rows(rows)
    return model, vm


def build_cons_mnl_lp(
    segment: Segment,
    hull: PartialOrder | tuple[np.ndarray, np.ndarray] | None = None,
    fixed_zero: np.ndarray | None = None,
) -> tuple[LinearModel, VarMap]:
    """Single-segment constrained MNL as an LP over the homogenized hull.

    ``hull`` is a dominance order (feasible sets are its antichains), a
    system ``A x <= b`` describing an integral polytope, or None for no
    constraint.  Products flagged in ``fixed_zero`` cannot be offered.
    """
    n = segment.n
    model = LinearModel()
    y0 = model.add_var("y0", lb=0.0, ub=1.0 / segment.u0)
    y = np.array([model.add_var(f"y{j + 1}", lb=0.0, obj=segment.r[j] * segment.u[j]) for j in range(n)])
    vm = VarMap(np.zeros(0, dtype=np.int64), np.array([y0]), y[None, :])
    rows = [_normalization(segment, y0, y, "norm")]
    rows += [_row([(int(y[j]), 1.0), (y0, -1.0)], "<=", 0.0, f"hull{j}") for j in range(n)]
    if isinstance(hull, PartialOrder):
        z = np.array([model.add_var(f"z{j + 1}", lb=0.0) for j in range(n)])
        vm.z[0] = z
        rows += chain_rows(hull, y, y0, z)
    elif hull is not None:
        A, b = (np.atleast_2d(np.asarray(hull[0], dtype=float)), np.atleast_1d(np.asarray(hull[1], dtype=float)))
        for k in range(A.shape[0]):
            nz = np.flatnonzero(A[k])
            rows.append(Row(np.concatenate([y[nz], [y0]]), np.concatenate([A[k, nz], [-b[k]]]), "<=", 0.0, f"hull_h{k}"))
    model.add_rows(rows)
    if fixed_zero is not None:
        for j in np.flatnonzero(fixed_zero):
            model.ub[int(y[j])] = 0.0
    return model, vm


def under_row(seg: Segment, j: int, S, x_var: int, y0_var: int, y_vars: np.ndarray) -> Row:
    """Scaled Under inequality ``U(S+j) y_j - x_j + sum_{t not in S+j} u_t y_t >= 0``."""
    n = seg.n
    in_s = np.zeros(n, dtype=bool)
    in_s[list(S)] = True
    U = seg.u0 + float(seg.u[in_s].sum()) + seg.u[j]
    rest = ~in_s
    rest[j] = False
    rest &= seg.u > 0
    idx = np.concatenate([[y_vars[j], x_var], y_vars[rest]])
    val = np.concatenate([[U, -1.0], seg.u[rest]])
    return Row(idx, val, ">=", 0.0, f"under{j}")


def build_idm_lp(idm: IdmInstance) -> tuple[LinearModel, VarMap]:
    inst = idm.base
    if np.any(inst.R < 0):
        raise ValueError("independent-demand LP needs nonnegative revenues")
    problems = validate(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    n = inst.n
    off = inst.offline
    online = idm.online_value()
    model = LinearModel()
    x = np.array([model.add_var(f"x{j + 1}", lb=0.0, ub=INF, obj=online[j]) for j in range(n)])
    y0, y = _add_segment_vars(model, 0, off, off.alpha)
    vm = VarMap(x, np.array([y0]), y[None, :])
    rows = [_normalization(off, y0, y, "norm")]
    rows += [_row([(int(y[j]), 1.0), (y0, -1.0)], "<=", 0.0, f"hull{j}") for j in range(n)]
    rows += [_row([(int(y[j]), 1.0), (int(y[k]), -1.0)], ">=", 0.0, f"prec{j}_{k}") for j, k in idm.precedence]
    everyone = set(range(n))
    for j in range(n):
        rows.append(under_row(off, j, (), int(x[j]), y0, y))
        rows.append(under_row(off, j, everyone - {j}, int(x[j]), y0, y))
    model.add_rows(rows)
    return model, vm
