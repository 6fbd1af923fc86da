"""Reduction of a cycle with rectangular matrices to a square periodic problem.

For a consistently oriented cycle ``w_0 -> w_1 -> ... -> w_{p-1} -> w_0`` the
product around the cycle factors through the smallest vertex, so at most
``c = min(dims)`` eigenvalues can be nonzero.  One sweep of QR factorizations
started at a smallest vertex makes every edge upper trapezoidal with a leading
``c x c`` block that carries the whole product; a square periodic Schur
decomposition of those blocks finishes the job.  Every reduced matrix ends up
with zeros below its main diagonal (tall ``[U; 0]`` or wide ``[U | *]``).

Cycles whose edges point both ways and whose dimensions differ contain
singular-pencil structure and are rejected with
:class:`~qschur.errors.UnsupportedCycleError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, UnsupportedCycleError
from .householder import qr
from .periodic import PeriodicSchurFactors, periodic_schur


@dataclass
class CompressedCycle:
    """Result of :func:`rectangular_cycle_compress`.

    ``Q[k]`` and ``T[k]`` are indexed like the input vertices and edges.
    ``core`` is the square periodic problem on the leading ``c x c`` blocks,
    already folded into ``Q`` and ``T``; ``start`` is the vertex seeded with
    the identity.
    """

    Q: list[np.ndarray]
    T: list[np.ndarray]
    core: PeriodicSchurFactors
    core_dim: int
    start: int


def cycle_dims(matrices, signs) -> list[int]:
    """Vertex dimensions implied by a signed cycle; raises on inconsistency."""
    p = len(matrices)
    dims = [None] * p
    for k, (a, s) in enumerate(zip(matrices, signs)):
        rows, cols = np.shape(a)
        src, dst = (k, (k + 1) % p) if s == 1 else ((k + 1) % p, k)
        for v, d in ((src, cols), (dst, rows)):
            if dims[v] is None:
                dims[v] = d
            elif dims[v] != d:
                raise ContractError(f"cycle vertex {v} has inconsistent dimensions {dims[v]} and {d}")
    return dims


def rectangular_cycle_compress(matrices, signs, field=None, *, carrier=0, max_iter=None) -> CompressedCycle:
    """Schur-reduce a consistently oriented cycle with rectangular matrices.

    Parameters
    ----------
    matrices, signs
        Cycle in the convention of :func:`~qschur.linalg.periodic.periodic_schur`.
    field : {"real", "complex"}, optional
    carrier : int
        Edge receiving the 2x2 diagonal blocks of the core in the real field.

    Raises
    ------
    UnsupportedCycleError
        If the edges do not all point the same way around the cycle.
    """
    mats = [np.asarray(a) for a in matrices]
    p = len(mats)
    signs = [int(s) for s in signs]
    if p < 2:
        raise ContractError("a rectangular cycle needs at least two edges")
    dims = cycle_dims(mats, signs)
    if len(set(signs)) != 1:
        raise UnsupportedCycleError(
            f"rectangular cycle with dimensions {dims} has edges in both directions"
        )
    if field is None:
        field = "complex" if any(np.iscomplexobj(a) for a in mats) else "real"
    dtype = np.float64 if field == "real" else np.complex128

    # Walk in the direction of the arrows: ``order[j]`` is the j-th vertex and
    # ``edges[j]`` the edge leaving it.
    if signs[0] == 1:
        order = list(range(p))
        edges = list(range(p))
    else:
        order = [(-j) % p for j in range(p)]
        edges = [(-j - 1) % p for j in range(p)]
    c = min(dims)
    j0 = min((j for j in range(p) if dims[order[j]] == c), key=lambda j: order[j])

    Q = [None] * p
    T = [None] * p
    Q[order[j0]] = np.eye(c, dtype=dtype)
    for t in range(p - 1):
        j = (j0 + t) % p
        v, w, e = order[j], order[(j + 1) % p], edges[j]
        q, r = qr(mats[e].astype(dtype) @ Q[v])
        Q[w], T[e] = q, r
    last = (j0 - 1) % p
    e = edges[last]
    T[e] = mats[e].astype(dtype) @ Q[order[last]]

    # Square core in the caller's sign convention, then fold it back in.
    core_mats = [t[:c, :c] for t in T]
    core = periodic_schur(core_mats, signs, field, carrier=carrier, max_iter=max_iter)
    for v in range(p):
        Q[v] = Q[v].copy()
        Q[v][:, :c] = Q[v][:, :c] @ core.Q[v]
    for k in range(p):
        src, dst = (k, (k + 1) % p) if signs[k] == 1 else ((k + 1) % p, k)
        t = T[k].copy()
        t[:c, :] = core.Q[dst].conj().T @ t[:c, :]
        t[:, :c] = t[:, :c] @ core.Q[src]
        t[:c, :c] = core.T[k]
        T[k] = t
    return CompressedCycle(Q, T, core, c, order[j0])
