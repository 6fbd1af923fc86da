"""Householder QR and RQ factorizations for real and complex dense matrices.

Both factorizations return a *full* square orthogonal/unitary factor and
normalize so that the leading entries of ``R`` (its diagonal, or for RQ the
diagonal anchored at the bottom-right corner) are real and non-negative.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class QRFactors(NamedTuple):
    Q: np.ndarray
    R: np.ndarray


class RQFactors(NamedTuple):
    R: np.ndarray
    Q: np.ndarray


def _reflector(x):
    """Return (v, tau) with (I - tau v v^H) x = beta e_0, or None if x is already there."""
    alpha = x[0]
    sigma = np.vdot(x[1:], x[1:]).real
    if sigma == 0.0:
        return None
    norm = np.sqrt(abs(alpha) ** 2 + sigma)
    phase = alpha / abs(alpha) if alpha != 0 else 1.0
    beta = -phase * norm
    v = x.copy()
    v[0] = alpha - beta
    tau = 2.0 / np.vdot(v, v).real
    return v, tau


def qr(a) -> QRFactors:
    """Factor ``a = Q @ R`` with ``Q`` square unitary and ``R`` upper trapezoidal."""
    a = np.asarray(a)
    dtype = np.result_type(a.dtype, np.float64)
    m, n = a.shape
    r = np.array(a, dtype=dtype, copy=True)
    q = np.eye(m, dtype=dtype)
    for k in range(min(m - 1, n)):
        h = _reflector(r[k:, k])
        if h is None:
            continue
        v, tau = h
        r[k:, k:] -= tau * np.outer(v, v.conj() @ r[k:, k:])
        q[:, k:] -= tau * np.outer(q[:, k:] @ v, v.conj())
        r[k + 1:, k] = 0.0
    # Make diag(R) real and non-negative.
    d = np.ones(m, dtype=dtype)
    for k in range(min(m, n)):
        rkk = r[k, k]
        if rkk != 0 and (np.iscomplexobj(r) or rkk < 0):
            d[k] = rkk / abs(rkk)
    r = d.conj()[:, None] * r
    q = q * d[None, :]
    for k in range(min(m, n)):
        r[k, k] = abs(r[k, k]) if not np.iscomplexobj(r) else complex(abs(r[k, k]), 0.0)
    return QRFactors(q, r)


def rq(a) -> RQFactors:
    """Factor ``a = R @ Q^H`` with ``Q`` square unitary.

    ``R`` has zeros wherever ``i - j > rows - cols``: its triangle is anchored
    at the bottom-right corner, so a wide ``R`` is ``[0 | U]`` and a tall one
    is ``[X; U]`` with ``U`` square upper triangular.
    """
    a = np.asarray(a)
    m, n = a.shape
    # (P_m a P_n)^H = Q0 R0  =>  a = (P_m R0^H P_n) (P_n Q0 P_n)^H, where P
    # reverses order.  An input already in RQ form maps to an upper
    # trapezoidal one, so it is left untouched up to phases.
    q0, r0 = qr(a[::-1, ::-1].conj().T)
    r = r0.conj().T[::-1, ::-1]
    q = q0[::-1, ::-1]
    return RQFactors(np.ascontiguousarray(r), np.ascontiguousarray(q))


def qr_pattern(rows: int, cols: int) -> np.ndarray:
    """Boolean mask of the entries a QR-type ``R`` forces to zero."""
    i, j = np.indices((rows, cols))
    return i > j


def rq_pattern(rows: int, cols: int) -> np.ndarray:
    """Boolean mask of the entries an RQ-type ``R`` forces to zero."""
    i, j = np.indices((rows, cols))
    return i - j > rows - cols
