"""Periodic Schur decomposition of a signed cycle of square matrices.

A cycle of length ``p`` has vertices ``0..p-1`` and edge ``k`` joining vertex
``k`` to vertex ``k + 1 (mod p)``.  With sign ``+1`` the matrix on edge ``k``
maps vertex ``k`` to vertex ``k + 1`` and is reduced as
``Q[k+1]^H A Q[k]``; with sign ``-1`` it maps the other way and is reduced as
``Q[k]^H A Q[k+1]``.  The formal product ``A[p-1]^s ... A[0]^s`` (an exponent
``-1`` standing for the inverse) is the matrix whose eigenvalues the
decomposition reveals.

The algorithm is the classical one: reduce to periodic Hessenberg-triangular
form (one Hessenberg "carrier", all other factors upper triangular) and run
implicitly shifted QR sweeps on the formal product, chasing each bulge once
around the cycle with small Householder transforms.  Shifts are computed in
homogeneous form so no factor is ever inverted, which keeps singular
negatively signed factors from breaking the iteration.  A single factor with
sign ``+1`` reduces to Francis's double-shift QR; two factors with signs
``(+1, -1)`` reduce to the QZ algorithm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, IterationLimitError
from .householder import qr, rq

log = logging.getLogger(__name__)

EPS = np.finfo(np.float64).eps
_GOLDEN = math.pi * (3.0 - math.sqrt(5.0))
_DEFLATE = 1.0


@dataclass
class PeriodicSchurFactors:
    """Result of :func:`periodic_schur`.

    ``Q[k]`` belongs to cycle vertex ``k`` and ``T[k]`` to cycle edge ``k``.
    ``blocks`` lists the diagonal blocks as ``(start, size)`` pairs; in the
    real field the 2x2 blocks sit on ``T[quasi_block_index]`` only.
    """

    Q: list[np.ndarray]
    T: list[np.ndarray]
    signs: tuple[int, ...]
    quasi_block_index: int | None
    blocks: list[tuple[int, int]]
    sweeps: int = 0

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the signed product, read off the diagonal blocks.

        Infinite values come from zero diagonals on negatively signed
        factors; ``nan`` marks the indeterminate case ``0 / 0``.
        """
        out = []
        for start, size in self.blocks:
            sl = slice(start, start + size)
            num = np.eye(size, dtype=complex)
            den = 1.0 + 0j
            for t, s in zip(self.T, self.signs):
                blk = t[sl, sl]
                if s == 1:
                    num = blk @ num
                else:
                    d = np.prod(np.diag(blk)) if size == 1 else np.linalg.det(blk)
                    num = _adjugate(blk) @ num
                    den *= d
            if size == 1:
                out.append(_safe_div(num[0, 0], den))
            else:
                for mu in np.linalg.eigvals(num):
                    out.append(_safe_div(mu, den))
        return np.array(out, dtype=complex)


def _safe_div(a, b):
    if b != 0:
        return a / b
    return complex(np.inf) if a != 0 else complex(np.nan)


def _adjugate(u):
    """Adjugate of a 1x1, a 2x2, or an upper triangular 3x3 matrix."""
    k = u.shape[0]
    if k == 1:
        return np.ones((1, 1), dtype=u.dtype)
    if k == 2:
        a, b, c, d = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
        return np.array([[d, -b], [-c, a]], dtype=u.dtype)
    if k == 3:
        a, b, c = u[0, 0], u[0, 1], u[0, 2]
        d, e, f = u[1, 1], u[1, 2], u[2, 2]
        return np.array([[d * f, -b * f, b * e - c * d], [0, a * f, -a * e], [0, 0, a * d]], dtype=u.dtype)
    raise ValueError("adjugate only implemented up to 3x3")


def _annihilator(v):
    """Unitary ``W`` with ``W^H v`` a multiple of the first unit vector."""
    return qr(v.reshape(-1, 1)).Q


class _Cycle:
    """Mutable working state: matrices, signs and accumulated vertex factors."""

    def __init__(self, mats, signs, dtype):
        self.p = len(mats)
        self.n = mats[0].shape[0]
        self.m = [np.array(a, dtype=dtype, copy=True) for a in mats]
        self.s = list(signs)
        self.q = [np.eye(self.n, dtype=dtype) for _ in range(self.p)]
        self.real = dtype == np.float64

    def row_vertex(self, e):
        return (e + 1) % self.p if self.s[e] == 1 else e

    def col_vertex(self, e):
        return e if self.s[e] == 1 else (e + 1) % self.p

    def apply(self, v, w, start):
        """Change the basis of vertex ``v`` by ``w`` on indices ``start..``."""
        sl = slice(start, start + w.shape[0])
        self.q[v][:, sl] = self.q[v][:, sl] @ w
        for e in sorted({(v - 1) % self.p, v}):
            if self.col_vertex(e) == v:
                self.m[e][:, sl] = self.m[e][:, sl] @ w
            if self.row_vertex(e) == v:
                self.m[e][sl, :] = w.conj().T @ self.m[e][sl, :]

    def restore(self, e, u, start, k):
        """Re-triangularize edge ``e`` on its diagonal block using vertex ``u``."""
        sl = slice(start, start + k)
        blk = self.m[e][sl, sl]
        if self.row_vertex(e) == u:
            w = qr(blk).Q
        else:
            w = rq(blk).Q
        self.apply(u, w, start)
        self.m[e][sl, sl] = np.triu(self.m[e][sl, sl])

    def chase_forward(self, start, k):
        """Propagate a change at vertex 1 around the cycle back to vertex 0."""
        for e in range(1, self.p):
            self.restore(e, (e + 1) % self.p, start, k)

    def chase_backward(self, start, k):
        """Propagate a change at vertex 0 backwards around to vertex 1."""
        for e in range(self.p - 1, 0, -1):
            self.restore(e, e, start, k)

    # -- reduction ---------------------------------------------------------

    def hessenberg_triangular(self):
        n, p = self.n, self.p
        for e in range(p - 1, 0, -1):
            if self.row_vertex(e) == e:
                w = qr(self.m[e]).Q
            else:
                w = rq(self.m[e]).Q
            self.apply(e, w, 0)
            self.m[e] = np.triu(self.m[e])
        h = self.m
        for j in range(n - 2):
            for r in range(n - 1, j + 1, -1):
                if h[0][r, j] == 0:
                    continue
                w = _annihilator(h[0][r - 1:r + 1, j])
                self.apply(1 % p, w, r - 1)
                h[0][r, j] = 0
                self.chase_forward(r - 1, 2)
        self.m[0] = np.triu(self.m[0], -1)


def _orientation(p, carrier, signs):
    """Relabel the cycle so ``carrier`` becomes edge 0 with sign +1.

    Returns ``(vertex_map, edge_map, new_signs)`` where ``vertex_map[k]`` and
    ``edge_map[k]`` are the original indices of new vertex/edge ``k``.
    """
    c = carrier
    if signs[c] == 1:
        vmap = [(c + k) % p for k in range(p)]
        emap = [(c + k) % p for k in range(p)]
        new = [signs[i] for i in emap]
    else:
        vmap = [(c + 1 - k) % p for k in range(p)]
        emap = [(c - k) % p for k in range(p)]
        new = [-signs[i] for i in emap]
    return vmap, emap, new


def periodic_schur(matrices, signs=None, field=None, *, carrier=0, max_iter=None) -> PeriodicSchurFactors:
    """Simultaneously triangularize a signed cycle of square matrices.

    Parameters
    ----------
    matrices : sequence of (n, n) arrays
        One matrix per cycle edge.
    signs : sequence of {+1, -1}, optional
        Orientation of each edge relative to the cycle (default all +1).
    field : {"real", "complex"}, optional
        Inferred from the dtype when omitted.
    carrier : int
        Edge that receives the 2x2 diagonal blocks in the real field.
    max_iter : int, optional
        Cap on the total number of QR sweeps, ``30 * n`` by default.

    Raises
    ------
    ContractError
        On non-square or mismatched matrices.
    IterationLimitError
        If the sweeps do not converge within ``max_iter``.
    """
    mats = [np.asarray(a) for a in matrices]
    p = len(mats)
    if p == 0:
        raise ContractError("periodic_schur needs at least one matrix")
    if signs is None:
        signs = [1] * p
    signs = [int(s) for s in signs]
    if len(signs) != p or any(s not in (1, -1) for s in signs):
        raise ContractError("signs must hold one +1/-1 per matrix")
    n = mats[0].shape[0]
    for a in mats:
        if a.ndim != 2 or a.shape != (n, n):
            raise ContractError(f"periodic_schur needs square matrices of one size, got {[x.shape for x in mats]}")
    if field is None:
        field = "complex" if any(np.iscomplexobj(a) for a in mats) else "real"
    dtype = np.float64 if field == "real" else np.complex128
    if field == "real" and any(np.iscomplexobj(a) and np.any(a.imag != 0) for a in mats):
        raise ContractError("complex entries with field='real'")
    if max_iter is None:
        max_iter = 30 * max(n, 1)

    vmap, emap, new_signs = _orientation(p, carrier % p, signs)
    cyc = _Cycle([np.real_if_close(mats[i]) if field == "real" else mats[i] for i in emap], new_signs, dtype)
    blocks, sweeps = _iterate(cyc, max_iter)

    Q = [None] * p
    T = [None] * p
    for k in range(p):
        Q[vmap[k]] = cyc.q[k]
        T[emap[k]] = cyc.m[k]
    quasi = emap[0] if field == "real" and any(sz == 2 for _, sz in blocks) else None
    return PeriodicSchurFactors(Q, T, tuple(signs), quasi, blocks, sweeps)


def _iterate(cyc: _Cycle, max_iter: int):
    n, p = cyc.n, cyc.p
    if n == 0:
        return [], 0
    cyc.hessenberg_triangular()
    h = cyc.m
    hnorm = max(np.linalg.norm(h[0]), np.finfo(float).tiny)
    norms = [np.linalg.norm(a) for a in cyc.m]
    blocks: list[tuple[int, int]] = []
    sweeps = 0
    stall = 0
    exceptional = 0
    hi = n - 1
    while hi >= 0:
        lo = 0
        for k in range(hi, 0, -1):
            sub = abs(h[0][k, k - 1])
            local = abs(h[0][k - 1, k - 1]) + abs(h[0][k, k])
            if sub <= _DEFLATE * p * EPS * local or sub <= EPS * hnorm:
                h[0][k, k - 1] = 0
                lo = k
                break
        if lo == hi:
            blocks.append((hi, 1))
            hi -= 1
            stall = 0
            continue
        if cyc.real and lo == hi - 1:
            if _split_real_pair(cyc, lo, hnorm):
                blocks.append((hi, 1))
                blocks.append((lo, 1))
            else:
                blocks.append((lo, 2))
            hi -= 2
            stall = 0
            continue
        if _deflate_infinite(cyc, lo, hi, norms):
            continue
        sweeps += 1
        stall += 1
        if sweeps > max_iter:
            raise IterationLimitError(
                f"periodic QR did not converge in {max_iter} sweeps (active window {lo}..{hi})",
                state={"T": [a.copy() for a in cyc.m], "Q": [q.copy() for q in cyc.q], "window": (lo, hi)},
            )
        if stall % 10 == 0:
            exceptional += 1
            _sweep(cyc, lo, hi, exceptional=exceptional)
        else:
            _sweep(cyc, lo, hi)
    for e in range(p):
        cyc.m[e] = np.triu(cyc.m[e], -1 if e == 0 else 0)
    # Only the recorded 2x2 blocks keep a subdiagonal entry.
    keep = np.zeros(n, dtype=bool)
    for start, size in blocks:
        if size == 2:
            keep[start] = True
    for k in range(n - 1):
        if not keep[k]:
            cyc.m[0][k + 1, k] = 0
    blocks.sort()
    return blocks, sweeps


def _deflate_infinite(cyc: _Cycle, lo: int, hi: int, norms) -> bool:
    """Split off an infinite eigenvalue sitting at either end of the window.

    A negatively signed factor with a zero diagonal entry at ``lo`` (or
    ``hi``) lets a single rotation zero the carrier's subdiagonal there; the
    zero column (row) of that factor absorbs the chase, so no fill survives.
    """
    h = cyc.m[0]
    for e in range(1, cyc.p):
        if cyc.s[e] != -1:
            continue
        m = cyc.m[e]
        tol = EPS * norms[e]
        if abs(m[lo, lo]) <= tol:
            m[lo, lo] = 0
            w = _annihilator(h[lo:lo + 2, lo])
            cyc.apply(1 % cyc.p, w, lo)
            h[lo + 1, lo] = 0
            cyc.chase_forward(lo, 2)
            return True
        if abs(m[hi, hi]) <= tol:
            m[hi, hi] = 0
            w = rq(h[hi:hi + 1, hi - 1:hi + 1]).Q
            cyc.apply(0, w, hi - 1)
            h[hi, hi - 1] = 0
            cyc.chase_backward(hi - 1, 2)
            return True
    return False


def _factor_blocks(cyc: _Cycle, sl, scales=None):
    """Product of the triangular factors' diagonal blocks on ``sl``, inverse-free.

    Negatively signed factors contribute their adjugate; the product of their
    determinants is returned separately, so the true block of the formal
    product is ``acc / delta``.  ``scales`` divides each factor first.
    """
    k = sl.stop - sl.start
    acc = np.eye(k, dtype=cyc.m[0].dtype)
    delta = 1.0
    for e in range(1, cyc.p):
        blk = cyc.m[e][sl, sl]
        if scales is not None:
            blk = blk / scales[e]
        if cyc.s[e] == 1:
            acc = blk @ acc
        else:
            acc = _adjugate(blk) @ acc
            delta = delta * np.prod(np.diag(blk))
    return acc, delta


def _shift_vector(cyc: _Cycle, lo: int, hi: int, exceptional: int = 0):
    h = cyc.m[0]
    hs = np.max(np.abs(h[lo:hi + 1, lo:hi + 1]))
    hs = hs if hs > 0 else 1.0
    k = 3 if cyc.real else 2
    lead = slice(lo, lo + k)
    tr = slice(hi - 1, hi + 1)
    win = slice(lo, hi + 1)
    scales = [1.0] + [np.max(np.abs(cyc.m[e][win, win])) or 1.0 for e in range(1, cyc.p)]
    r_lead, d_lead = _factor_blocks(cyc, lead, scales)
    h_lead = h[lead, lo:lo + k] / hs
    y1 = r_lead @ h_lead[:, 0]
    r_tr, d_tr = _factor_blocks(cyc, tr, scales)
    n_tr = r_tr @ (h[tr, tr] / hs)
    if cyc.real:
        y2 = r_lead @ (h_lead[:, :2] @ y1[:2])
        e1 = np.zeros(3, dtype=h.dtype)
        e1[0] = 1.0
        if exceptional:
            rho = max(abs(n_tr[1, 1]), abs(n_tr[1, 0]), 0.5)
            theta = exceptional * _GOLDEN
            b2, b1, b0 = 1.0, 2 * rho * math.cos(theta), rho * rho
        else:
            b2 = d_tr * d_tr
            b1 = d_tr * (n_tr[0, 0] + n_tr[1, 1])
            b0 = n_tr[0, 0] * n_tr[1, 1] - n_tr[0, 1] * n_tr[1, 0]
        return b2 * y2 - b1 * d_lead * y1 + b0 * d_lead * d_lead * e1
    e1 = np.zeros(2, dtype=h.dtype)
    e1[0] = 1.0
    if exceptional:
        rho = max(abs(n_tr[1, 1]), abs(n_tr[1, 0]), 0.5)
        beta, mu = 1.0, rho * np.exp(1j * exceptional * _GOLDEN)
    else:
        tr_ = n_tr[0, 0] + n_tr[1, 1]
        det = n_tr[0, 0] * n_tr[1, 1] - n_tr[0, 1] * n_tr[1, 0]
        disc = np.sqrt(tr_ * tr_ / 4 - det + 0j)
        mus = (tr_ / 2 + disc, tr_ / 2 - disc)
        mu = min(mus, key=lambda z: abs(z - n_tr[1, 1]))
        beta = d_tr
    return beta * y1 - mu * d_lead * e1


def _bulge_start(cyc: _Cycle, lo: int, hi: int, exceptional: int = 0):
    """Pick the row where the sweep starts, and its shift vector.

    Starting below ``lo`` is allowed when a small subdiagonal entry would
    absorb the bulge with negligible fill.  Without this, a nearly reduced
    window can stall: the bulge introduced at ``lo`` is tiny and carries no
    information down to the converging trailing block.
    """
    h = cyc.m[0]
    size = 3 if cyc.real else 2
    for m in range(hi - size + 1, lo, -1):
        x = _shift_vector(cyc, m, hi, exceptional)
        if not np.all(np.isfinite(x)):
            continue
        # First column of the transformation that reaches the carrier's rows.
        y = x
        sl = slice(m, m + x.shape[0])
        for e in range(cyc.p - 1, 0, -1):
            blk = cyc.m[e][sl, sl]
            y = (_adjugate(blk) if cyc.s[e] == 1 else blk) @ y
            top = np.max(np.abs(y))
            if top == 0 or not np.isfinite(top):
                break
            y = y / top
        else:
            local = abs(h[m - 1, m - 1]) + abs(h[m, m]) + abs(h[m + 1, m + 1])
            if abs(h[m, m - 1]) * np.sum(np.abs(y[1:])) <= cyc.p * EPS * abs(y[0]) * local:
                return m, x
    return lo, _shift_vector(cyc, lo, hi, exceptional)


def _sweep(cyc: _Cycle, lo: int, hi: int, exceptional: int = 0):
    """One implicitly shifted QR sweep on the active window ``lo..hi``."""
    h = cyc.m
    p = cyc.p
    size = 3 if cyc.real else 2
    lo, x = _bulge_start(cyc, lo, hi, exceptional)
    if not np.all(np.isfinite(x)) or np.linalg.norm(x[1:]) == 0:
        # Degenerate shift polynomial; fall back to a fixed exceptional shift.
        x = _shift_vector(cyc, lo, hi, exceptional=exceptional + 1)
    for k in range(lo, hi):
        nr = min(size, hi - k + 1)
        if k == lo:
            w = _annihilator(x[:nr])
            cyc.apply(0, w, k)
            cyc.chase_backward(k, nr)
            if k > 0:
                # Negligible fill when the sweep starts inside the window.
                h[0][k + 1:k + nr, k - 1] = 0
        else:
            w = _annihilator(h[0][k:k + nr, k - 1])
            cyc.apply(1 % p, w, k)
            h[0][k + 1:k + nr, k - 1] = 0
            cyc.chase_forward(k, nr)


def _split_real_pair(cyc: _Cycle, lo: int, hnorm: float) -> bool:
    """Triangularize a trailing 2x2 block whose product has real eigenvalues.

    Returns False (leaving the block in place) when the eigenvalues form a
    complex-conjugate pair.
    """
    sl = slice(lo, lo + 2)
    for _ in range(3):
        h = cyc.m[0]
        if abs(h[lo + 1, lo]) <= EPS * hnorm:
            h[lo + 1, lo] = 0
            return True
        r, _ = _factor_blocks(cyc, sl)
        nmat = r @ h[sl, sl]
        tr_ = nmat[0, 0] + nmat[1, 1]
        det = nmat[0, 0] * nmat[1, 1] - nmat[0, 1] * nmat[1, 0]
        disc = tr_ * tr_ / 4 - det
        if disc < 0:
            return False
        root = math.sqrt(disc)
        mu = tr_ / 2 + root if tr_ >= 0 else tr_ / 2 - root
        # Eigenvector of nmat for mu, from whichever row is better scaled.
        a, b = nmat[0, 0] - mu, nmat[0, 1]
        c, d = nmat[1, 0], nmat[1, 1] - mu
        if abs(a) + abs(b) >= abs(c) + abs(d):
            v = np.array([b, -a])
        else:
            v = np.array([d, -c])
        if not np.any(v):
            v = np.array([1.0, 0.0])
        w = _annihilator(v.astype(h.dtype))
        cyc.apply(0, w, lo)
        cyc.chase_backward(lo, 2)
    h = cyc.m[0]
    if abs(h[lo + 1, lo]) <= 1e3 * EPS * hnorm:
        h[lo + 1, lo] = 0
        return True
    log.warning("could not split a real 2x2 block at %d (residual %.3e)", lo, abs(h[lo + 1, lo]))
    return False


def real_schur(a, max_iter=None):
    """Real Schur form ``Q^T A Q = T`` by Hessenberg reduction and Francis double-shift QR."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        raise ContractError("real_schur needs a real matrix")
    f = periodic_schur([a], [1], "real", max_iter=max_iter)
    return f.Q[0], f.T[0]


def complex_schur(a, max_iter=None):
    """Complex Schur form ``U^H A U = T`` with ``T`` upper triangular."""
    f = periodic_schur([np.asarray(a, dtype=complex)], [1], "complex", max_iter=max_iter)
    return f.Q[0], f.T[0]
