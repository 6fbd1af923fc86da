"""Quivers, their matrix representations, and pseudoforest classification.

A quiver is a directed multigraph whose vertices carry a dimension.  Edge
``i`` points from ``src`` (the column space of its matrix) to ``dst`` (the
row space), so the matrix on edge ``i`` is ``dim(dst) x dim(src)`` and a
change of bases ``Q`` acts on it as ``Q[dst]^H @ A @ Q[src]``.

Connectivity and cycles are always taken in the underlying undirected graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import ContractError

FIELDS = ("real", "complex")


@dataclass(frozen=True)
class Vertex:
    id: int
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ContractError(f"vertex {self.id}: dimension must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst

    def other(self, v: int) -> int:
        return self.dst if v == self.src else self.src


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices, key=lambda v: v.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))
        vids = [v.id for v in self.vertices]
        if len(set(vids)) != len(vids):
            raise ContractError("duplicate vertex ids")
        eids = [e.id for e in self.edges]
        if len(set(eids)) != len(eids):
            raise ContractError("duplicate edge ids")
        known = set(vids)
        for e in self.edges:
            if e.src not in known or e.dst not in known:
                raise ContractError(f"edge {e.id} references an unknown vertex")

    @classmethod
    def from_lists(cls, dims: Mapping[int, int] | list[int], arrows) -> "Quiver":
        """Build from vertex dimensions and ``(src, dst)`` pairs.

        ``dims`` is either a mapping id -> dim or a list whose position ``k``
        is vertex ``k + 1``.  Edges are numbered from 1 in the given order.
        """
        if not isinstance(dims, Mapping):
            dims = {k + 1: d for k, d in enumerate(dims)}
        vertices = tuple(Vertex(i, d) for i, d in dims.items())
        edges = tuple(Edge(k + 1, s, t) for k, (s, t) in enumerate(arrows))
        return cls(vertices, edges)

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.edges)

    def dim(self, vid: int) -> int:
        return self._dims[vid]

    def edge(self, eid: int) -> Edge:
        return self._edges[eid]

    @cached_property
    def _dims(self) -> dict[int, int]:
        return {v.id: v.dim for v in self.vertices}

    @cached_property
    def _edges(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    def incident(self, vid: int) -> list[Edge]:
        """Edges touching ``vid``, by ascending id (a loop is listed once)."""
        return [e for e in self.edges if vid in (e.src, e.dst)]


@dataclass(frozen=True)
class Representation:
    """One matrix per edge id, over the real or the complex field."""

    matrices: Mapping[int, np.ndarray]
    field: str = "real"

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ContractError(f"field must be one of {FIELDS}, got {self.field!r}")
        dtype = np.float64 if self.field == "real" else np.complex128
        mats = {}
        for eid, a in self.matrices.items():
            a = np.asarray(a)
            if self.field == "real" and np.iscomplexobj(a):
                if np.any(a.imag != 0):
                    raise ContractError(f"edge {eid}: complex entries in a real representation")
                a = a.real
            a = np.array(a, dtype=dtype, copy=True)
            if a.ndim != 2:
                raise ContractError(f"edge {eid}: matrix must be two-dimensional")
            if not np.all(np.isfinite(a)):
                raise ContractError(f"edge {eid}: non-finite entries")
            a.setflags(write=False)
            mats[eid] = a
        object.__setattr__(self, "matrices", mats)

    def __getitem__(self, eid: int) -> np.ndarray:
        return self.matrices[eid]

    @property
    def dtype(self):
        return np.float64 if self.field == "real" else np.complex128


def validate_dimensions(quiver: Quiver, rep: Representation) -> list[str]:
    """Return one message per edge whose matrix is missing or mis-shaped."""
    out = []
    for e in quiver.edges:
        if e.id not in rep.matrices:
            out.append(f"edge {e.id}: no matrix given")
            continue
        want = (quiver.dim(e.dst), quiver.dim(e.src))
        got = rep.matrices[e.id].shape
        if got != want:
            out.append(f"edge {e.id}: expected {want[0]}x{want[1]} matrix, got {got[0]}x{got[1]}")
    extra = sorted(set(rep.matrices) - {e.id for e in quiver.edges})
    for eid in extra:
        out.append(f"edge {eid}: matrix given for an edge that does not exist")
    return out


class Kind(str, Enum):
    TREE = "tree"
    PSEUDOTREE = "pseudotree_with_cycle"
    REJECTED = "rejected"


@dataclass(frozen=True)
class Component:
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    kind: Kind
    evidence: tuple[tuple[int, ...], ...] = ()

    @property
    def root(self) -> int:
        return self.vertices[0]


@dataclass(frozen=True)
class PseudoforestReport:
    components: tuple[Component, ...]

    @property
    def is_pseudoforest(self) -> bool:
        return all(c.kind is not Kind.REJECTED for c in self.components)

    @property
    def rejected(self) -> tuple[Component, ...]:
        return tuple(c for c in self.components if c.kind is Kind.REJECTED)

    def to_dict(self) -> dict:
        return {
            "is_pseudoforest": self.is_pseudoforest,
            "components": [
                {
                    "vertices": list(c.vertices),
                    "edges": list(c.edges),
                    "kind": c.kind.value,
                    **({"evidence": [list(cy) for cy in c.evidence]} if c.evidence else {}),
                }
                for c in self.components
            ],
        }


def _components(quiver: Quiver) -> list[tuple[list[int], list[int]]]:
    seen: set[int] = set()
    comps = []
    for v in quiver.vertices:
        if v.id in seen:
            continue
        verts, edges = [], set()
        queue = deque([v.id])
        seen.add(v.id)
        while queue:
            u = queue.popleft()
            verts.append(u)
            for e in quiver.incident(u):
                edges.add(e.id)
                w = e.other(u)
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append((sorted(verts), sorted(edges)))
    return comps


def _tree_path(parent: dict[int, tuple[int, int] | None], u: int, w: int) -> list[int]:
    """Edge ids on the spanning-tree path between ``u`` and ``w``."""

    def chain(x):
        out = [x]
        while parent[x] is not None:
            x = parent[x][0]
            out.append(x)
        return out

    cu, cw = chain(u), chain(w)
    common = set(cu) & set(cw)
    path = []
    for start in (u, w):
        x = start
        while x not in common:
            path.append(parent[x][1])
            x = parent[x][0]
    return path


def _two_cycles(quiver: Quiver, verts: list[int], edges: list[int]) -> tuple[tuple[int, ...], ...]:
    """Two distinct fundamental cycles of a component with |E| > |V|."""
    parent: dict[int, tuple[int, int] | None] = {verts[0]: None}
    tree_edges = set()
    queue = deque([verts[0]])
    while queue:
        u = queue.popleft()
        for e in quiver.incident(u):
            w = e.other(u)
            if w not in parent:
                parent[w] = (u, e.id)
                tree_edges.add(e.id)
                queue.append(w)
    extra = [eid for eid in edges if eid not in tree_edges]
    cycles = []
    for eid in extra[:2]:
        e = quiver.edge(eid)
        cycles.append(tuple(sorted([eid] + _tree_path(parent, e.src, e.dst))))
    return tuple(cycles)


def classify(quiver: Quiver) -> PseudoforestReport:
    """Split into connected components and label each by edge/vertex count."""
    comps = []
    for verts, edges in _components(quiver):
        if len(edges) == len(verts) - 1:
            comps.append(Component(tuple(verts), tuple(edges), Kind.TREE))
        elif len(edges) == len(verts):
            comps.append(Component(tuple(verts), tuple(edges), Kind.PSEUDOTREE))
        else:
            ev = _two_cycles(quiver, verts, edges)
            comps.append(Component(tuple(verts), tuple(edges), Kind.REJECTED, ev))
    return PseudoforestReport(tuple(comps))


@dataclass(frozen=True)
class CycleInfo:
    """The unique undirected cycle of a pseudotree, traversed once.

    ``edges[k]`` joins ``vertices[k]`` and ``vertices[(k + 1) % length]``;
    ``signs[k]`` is +1 when that edge points from ``vertices[k]`` to the next
    vertex and -1 when it points backwards.
    """

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    signs: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.edges)

    def reversed(self) -> "CycleInfo":
        """Same cycle, opposite orientation, still starting at ``vertices[0]``."""
        p = self.length
        verts = (self.vertices[0],) + tuple(reversed(self.vertices[1:]))
        edges = tuple(reversed(self.edges))
        signs = tuple(-s for s in reversed(self.signs))
        if p == 1:
            return self
        return CycleInfo(verts, edges, signs)


def find_cycle(quiver: Quiver, component: Component) -> CycleInfo:
    if component.kind is not Kind.PSEUDOTREE:
        raise ContractError(f"find_cycle needs a pseudotree component, got {component.kind.value}")
    # Strip degree-1 vertices until only the cycle remains.
    alive_e = set(component.edges)
    deg = {v: 0 for v in component.vertices}
    for eid in alive_e:
        e = quiver.edge(eid)
        deg[e.src] += 1
        deg[e.dst] += 1
    leaves = deque(v for v, d in deg.items() if d == 1)
    while leaves:
        v = leaves.popleft()
        if deg[v] != 1:
            continue
        (eid,) = [x for x in alive_e if v in (quiver.edge(x).src, quiver.edge(x).dst)]
        alive_e.discard(eid)
        deg[v] = 0
        w = quiver.edge(eid).other(v)
        deg[w] -= 1
        if deg[w] == 1:
            leaves.append(w)
    cyc_edges = sorted(alive_e)
    start = min(v for v in component.vertices if deg[v] > 0)
    verts, edges, signs = [], [], []
    cur, used = start, set()
    while len(edges) < len(cyc_edges):
        eid = min(x for x in cyc_edges if x not in used and cur in (quiver.edge(x).src, quiver.edge(x).dst))
        e = quiver.edge(eid)
        used.add(eid)
        verts.append(cur)
        edges.append(eid)
        signs.append(1 if e.src == cur else -1)
        cur = e.other(cur)
    return CycleInfo(tuple(verts), tuple(edges), tuple(signs))


class Direction(str, Enum):
    FROM_FIXED = "from_fixed"
    TO_FIXED = "to_fixed"


@dataclass(frozen=True)
class TreeStep:
    edge: int
    fixed_vertex: int
    free_vertex: int
    direction: Direction


@dataclass(frozen=True)
class TraversalPlan:
    component: Component
    cycle: CycleInfo | None
    root: int | None
    steps: tuple[TreeStep, ...]

    def depth(self) -> dict[int, int]:
        """Distance of every vertex from the cycle (or the root)."""
        d = {v: 0 for v in (self.cycle.vertices if self.cycle else (self.root,))}
        for s in self.steps:
            d[s.free_vertex] = d[s.fixed_vertex] + 1
        return d


def plan_traversal(quiver: Quiver, component: Component, cycle: CycleInfo | None = None) -> TraversalPlan:
    """Breadth-first order in which the tree edges get their free factor fixed."""
    if component.kind is Kind.REJECTED:
        raise ContractError("cannot plan a traversal for a rejected component")
    if component.kind is Kind.PSEUDOTREE:
        if cycle is None:
            cycle = find_cycle(quiver, component)
        seeds = sorted(cycle.vertices)
        skip = set(cycle.edges)
        root = None
    else:
        cycle = None
        root = component.root
        seeds = [root]
        skip = set()
    fixed = set(seeds)
    queue = deque(seeds)
    steps = []
    while queue:
        u = queue.popleft()
        for e in quiver.incident(u):
            if e.id in skip:
                continue
            w = e.other(u)
            if w in fixed:
                continue
            direction = Direction.FROM_FIXED if e.src == u else Direction.TO_FIXED
            steps.append(TreeStep(e.id, u, w, direction))
            fixed.add(w)
            queue.append(w)
    return TraversalPlan(component, cycle, root, tuple(steps))
