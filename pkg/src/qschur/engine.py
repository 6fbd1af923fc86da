"""Simultaneous Schur decomposition of a quiver representation.

Every connected component of a pseudoforest is handled on its own.  Its
cycle, if any, is reduced first by a periodic Schur decomposition, which
fixes the factors of all cycle vertices.  The remaining tree edges are then
visited breadth first: each one already has the factor of one endpoint fixed,
and a single QR (edge pointing away) or RQ (edge pointing toward the fixed
vertex) factorization yields the factor of the other endpoint together with a
trapezoidal reduced matrix.  Pure trees start from an identity factor at
their lowest vertex.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DimensionError, IterationLimitError
from .linalg.householder import qr, rq
from .linalg.periodic import periodic_schur
from .linalg.rectangular import rectangular_cycle_compress
from .quiver import (
    Component,
    CycleInfo,
    Direction,
    Kind,
    Quiver,
    Representation,
    TraversalPlan,
    TreeStep,
    classify,
    plan_traversal,
    validate_dimensions,
)
from .shapes import ShapeClass, shape_for

log = logging.getLogger(__name__)

ZERO_TOL = 1e-10
REJECTION_CODE = "two-cycles-in-component"


@dataclass
class EngineOptions:
    """Knobs for :func:`triangularize`.

    ``zero_tol`` is relative to ``max(1, ||A_i||_F)``: entries of ``T_i``
    inside its zero pattern and below that size are set to exact zero.
    """

    max_iter: int | None = None
    zero_tol: float = ZERO_TOL


@dataclass
class SchurDecomposition:
    """Per-vertex unitary factors and per-edge reduced matrices.

    ``Q[v]^H @ A[e] @ Q[u] == T[e]`` for every edge ``e: u -> v``.
    ``provenance`` records the choices that determine the result: component
    order, cycles and their orientation, the 2x2-block carrier, the majority
    direction and the order in which tree edges were processed.
    """

    Q: dict[int, np.ndarray]
    T: dict[int, np.ndarray]
    shapes: dict[int, ShapeClass]
    field: str
    provenance: dict = dc_field(default_factory=dict)


@dataclass
class Rejection:
    """Why a quiver has no simultaneous Schur form.

    ``component`` is the index of the first offending component and
    ``evidence`` two distinct undirected cycles in it (edge-id tuples).
    ``offending`` lists every rejected component as ``(index, evidence)``.
    """

    component: int
    evidence: tuple[tuple[int, ...], ...]
    code: str = REJECTION_CODE
    offending: list = dc_field(default_factory=list)

    @property
    def message(self) -> str:
        cycles = " and ".join("(" + ", ".join(map(str, c)) + ")" for c in self.evidence)
        return f"component {self.component} contains two cycles, edges {cycles}"


def majority_direction(cycle: CycleInfo) -> int:
    """Orientation (+1 = as listed, -1 = reversed) that most cycle edges follow.

    Ties go to the direction of the lowest-id cycle edge.
    """
    score = sum(cycle.signs)
    if score > 0:
        return 1
    if score < 0:
        return -1
    k = cycle.edges.index(min(cycle.edges))
    return cycle.signs[k]


def _is_rectangular(quiver: Quiver, cycle: CycleInfo) -> bool:
    return len({quiver.dim(v) for v in cycle.vertices}) > 1


def expected_shape(edge: int, plan: TraversalPlan, quiver: Quiver, field: str) -> ShapeClass:
    """Shape the engine promises for ``T[edge]``.

    Square edges are upper triangular, except the first cycle edge in the
    real field, which may carry 2x2 blocks.  Tree edges get the QR shapes
    (``tall_a``/``wide_d``) when they point away from the fixed vertex and
    the RQ shapes (``tall_c``/``wide_b``) otherwise, which amounts to
    ``a``/``b`` exactly when the vertex farther from the cycle is the larger
    one.  Edges of a rectangular cycle all get QR shapes.
    """
    e = quiver.edge(edge)
    rows, cols = quiver.dim(e.dst), quiver.dim(e.src)
    cycle = plan.cycle
    if cycle is not None and edge in cycle.edges:
        quasi = field == "real" and edge == cycle.edges[0]
        return shape_for(rows, cols, "qr", quasi)
    for step in plan.steps:
        if step.edge == edge:
            return shape_for(rows, cols, "qr" if step.direction is Direction.FROM_FIXED else "rq")
    raise KeyError(f"edge {edge} is not part of the plan")


def tree_step(step: TreeStep, fixed_factor, a):
    """Fix the free endpoint of a tree edge; returns ``(free_factor, T)``."""
    if step.direction is Direction.FROM_FIXED:
        q, r = qr(np.asarray(a) @ fixed_factor)
    else:
        r, q = rq(np.asarray(fixed_factor).conj().T @ a)
    return q, r


def _reduce_cycle(quiver: Quiver, rep: Representation, cycle: CycleInfo, field: str, max_iter):
    mats = [rep[e] for e in cycle.edges]
    if _is_rectangular(quiver, cycle):
        res = rectangular_cycle_compress(mats, cycle.signs, field, carrier=0, max_iter=max_iter)
        return res.Q, res.T, {"core_dim": res.core_dim, "start": cycle.vertices[res.start]}
    res = periodic_schur(mats, cycle.signs, field, carrier=0, max_iter=max_iter)
    return res.Q, res.T, {"core_dim": quiver.dim(cycle.vertices[0]), "sweeps": res.sweeps}


def _flush(t, shape: ShapeClass, scale: float, tol: float):
    """Zero the pattern entries of ``t`` that are below ``tol * scale``."""
    t = np.array(t, copy=True)
    mask = shape.zero_mask(*t.shape)
    small = mask & (np.abs(t) <= tol * scale)
    t[small] = 0.0
    if mask.any() and not small[mask].all():
        log.warning("shape %s: %d pattern entries above the zero threshold", shape, int((~small & mask).sum()))
    return t + 0.0


def triangularize_pseudotree(quiver: Quiver, component: Component, rep: Representation,
                             field: str, options: EngineOptions | None = None) -> SchurDecomposition:
    """Reduce one tree or pseudotree component."""
    options = options or EngineOptions()
    dtype = np.float64 if field == "real" else np.complex128
    plan = plan_traversal(quiver, component)
    Q: dict[int, np.ndarray] = {}
    T: dict[int, np.ndarray] = {}
    prov: dict = {"vertices": list(component.vertices), "kind": component.kind.value}
    if plan.cycle is not None:
        cyc = plan.cycle
        qs, ts, info = _reduce_cycle(quiver, rep, cyc, field, options.max_iter)
        for v, q in zip(cyc.vertices, qs):
            Q[v] = q
        for e, t in zip(cyc.edges, ts):
            T[e] = t
        prov["cycle"] = {
            "vertices": list(cyc.vertices),
            "edges": list(cyc.edges),
            "signs": list(cyc.signs),
            "majority": majority_direction(cyc),
            "carrier": cyc.edges[0] if field == "real" else None,
            **info,
        }
    else:
        Q[plan.root] = np.eye(quiver.dim(plan.root), dtype=dtype)
        prov["root"] = plan.root
    for step in plan.steps:
        Q[step.free_vertex], T[step.edge] = tree_step(step, Q[step.fixed_vertex], rep[step.edge])
    prov["traversal"] = [
        {"edge": s.edge, "fixed": s.fixed_vertex, "free": s.free_vertex, "direction": s.direction.value}
        for s in plan.steps
    ]
    shapes = {}
    for e in component.edges:
        shapes[e] = expected_shape(e, plan, quiver, field)
        scale = max(1.0, float(np.linalg.norm(rep[e])))
        T[e] = _flush(T[e], shapes[e], scale, options.zero_tol)
    return SchurDecomposition(Q, T, shapes, field, prov)


def triangularize(quiver: Quiver, rep: Representation, field: str | None = None,
                  options: EngineOptions | None = None) -> SchurDecomposition | Rejection:
    """Simultaneous Schur decomposition, or the reason none exists.

    Parameters
    ----------
    quiver, rep
        The graph and its matrices; ``rep[e]`` must be ``dim(dst) x dim(src)``.
    field : {"real", "complex"}, optional
        Defaults to ``rep.field``.  A real representation may be reduced over
        the complex field; the reverse raises.
    options : EngineOptions, optional

    Raises
    ------
    DimensionError
        If some matrix does not fit its edge.
    IterationLimitError
        If a cycle fails to converge; ``context`` names the component.
    """
    options = options or EngineOptions()
    violations = validate_dimensions(quiver, rep)
    if violations:
        raise DimensionError(violations)
    field = field or rep.field
    if field != rep.field:
        rep = Representation(dict(rep.matrices), field)
    report = classify(quiver)
    if not report.is_pseudoforest:
        bad = [(i, c.evidence) for i, c in enumerate(report.components) if c.kind is Kind.REJECTED]
        return Rejection(bad[0][0], bad[0][1], offending=bad)
    out = SchurDecomposition({}, {}, {}, field, {"components": []})
    for i, comp in enumerate(report.components):
        try:
            part = triangularize_pseudotree(quiver, comp, rep, field, options)
        except IterationLimitError as exc:
            exc.context = {"component": i, "vertices": list(comp.vertices), "edges": list(comp.edges)}
            raise
        out.Q.update(part.Q)
        out.T.update(part.T)
        out.shapes.update(part.shapes)
        out.provenance["components"].append(part.provenance)
    return out
