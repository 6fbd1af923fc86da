"""Seeded problem generator.

Every entry is drawn i.i.d. from the standard normal distribution (real
field) or as ``(x + i y) / sqrt(2)`` with ``x, y`` standard normal (complex
field), using ``numpy.random.default_rng(seed)``.  Graph choices that are
random (tree shapes, edge directions, default dimensions) come from the same
generator, so a seed fixes the whole problem.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError
from .quiver import Quiver, Representation

TEMPLATES = (
    "loop", "edge", "pencil", "contragredient", "cycle",
    "tree", "pseudotree", "cycle-trees", "two-loops", "parallel",
)


def _dims(dims, count, rng, default_hi=6):
    if dims is None or len(dims) == 0:
        return [int(x) for x in rng.integers(1, default_hi + 1, size=count)]
    dims = [int(d) for d in dims]
    if len(dims) == 1:
        return dims * count
    if len(dims) != count:
        raise ContractError(f"expected {count} dimensions, got {len(dims)}")
    return dims


def _attach_tree(rng, arrows, depth, start_vertex, n_new, max_depth):
    """Grow ``n_new`` vertices onto existing ones, respecting ``max_depth``."""
    for v in range(start_vertex, start_vertex + n_new):
        parents = sorted(u for u, d in depth.items() if d < max_depth)
        u = parents[int(rng.integers(len(parents)))]
        arrows.append((u, v) if rng.random() < 0.5 else (v, u))
        depth[v] = depth[u] + 1


def topology(template: str, *, dims=None, rng, length=3, vertices=4, depth=3, signs=None, d=3):
    """Return ``(dims, arrows)`` for a template; arrows are ``(src, dst)`` pairs."""
    if template == "loop":
        return _dims(dims, 1, rng), [(1, 1)]
    if template == "two-loops":
        return _dims(dims, 1, rng), [(1, 1), (1, 1)]
    if template == "edge":
        return _dims(dims, 2, rng), [(1, 2)]
    if template == "pencil":
        return _dims(dims, 2, rng), [(1, 2), (1, 2)]
    if template == "parallel":
        return _dims(dims, 2, rng), [(1, 2)] * d
    if template == "contragredient":
        return _dims(dims, 2, rng), [(1, 2), (2, 1)]
    if template == "cycle":
        signs = signs or "+" * length
        if len(signs) != length or set(signs) - {"+", "-"}:
            raise ContractError(f"signs must be {length} characters from '+-', got {signs!r}")
        arrows = []
        for k, s in enumerate(signs):
            u, w = k + 1, (k + 1) % length + 1
            arrows.append((u, w) if s == "+" else (w, u))
        return _dims(dims, length, rng), arrows
    if template == "tree":
        arrows: list = []
        _attach_tree(rng, arrows, {1: 0}, 2, vertices - 1, depth)
        return _dims(dims, vertices, rng), arrows
    if template == "pseudotree":
        sign_str = signs or "+" * length
        _, arrows = topology("cycle", dims=[1], rng=rng, length=length, signs=sign_str)
        all_dims = _dims(dims, length + vertices, rng)
        _attach_tree(rng, arrows, {v: 0 for v in range(1, length + 1)}, length + 1, vertices, depth)
        return all_dims, arrows
    if template == "cycle-trees":
        # Cycle 1-2-3 with edges 1->2, 3->2, 1->3; trees hang off vertex 1:
        # 1->4, 4->5, 6->4 and 7->1.
        return _dims(dims, 7, rng), [(1, 2), (3, 2), (1, 3), (1, 4), (4, 5), (6, 4), (7, 1)]
    raise ContractError(f"unknown template {template!r}; choose from {', '.join(TEMPLATES)}")


def random_matrix(rng, rows, cols, field="real"):
    if field == "real":
        return rng.standard_normal((rows, cols))
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def generate(template: str, *, dims=None, seed: int = 0, field: str = "real", **params):
    """Build a seeded ``(Quiver, Representation)`` from a template.

    Parameters
    ----------
    template : str
        One of :data:`TEMPLATES`.
    dims : list of int, optional
        Vertex dimensions; a single value is broadcast, and missing values
        are drawn uniformly from 1..6.
    seed : int
    field : {"real", "complex"}
    **params
        ``length`` and ``signs`` (``"+-+"`` style) for cycles and
        pseudotrees, ``vertices`` and ``depth`` for trees, ``d`` for
        ``parallel``.
    """
    rng = np.random.default_rng(seed)
    vdims, arrows = topology(template, dims=dims, rng=rng, **params)
    quiver = Quiver.from_lists(vdims, arrows)
    mats = {}
    for e in quiver.edges:
        mats[e.id] = random_matrix(rng, quiver.dim(e.dst), quiver.dim(e.src), field)
    return quiver, Representation(mats, field)
