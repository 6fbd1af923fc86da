"""Independent eigenvalue oracles used to cross-check the Schur kernels.

Neither oracle shares code with the QR/QZ iterations it checks:

* :func:`cyclic_embedding_oracle` embeds a signed cycle into one block-cyclic
  pencil and hands it to LAPACK's QZ (through scipy).
* :func:`companion_eigenvalues` builds the characteristic polynomial in
  extended precision (mpmath) and takes the roots of that polynomial.
"""

from __future__ import annotations

import mpmath
import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from ..errors import ContractError


def cyclic_embedding_oracle(matrices, signs=None) -> np.ndarray:
    """Eigenvalues of the signed cycle product ``A[p-1]^s ... A[0]^s``.

    Unknowns ``x_0..x_{p-1}`` live on the cycle vertices.  Edge ``k`` with sign
    +1 contributes the block equation ``A_k x_k = lam x_{k+1}``; with sign -1
    it contributes ``x_k = lam A_k x_{k+1}``.  Eliminating around the cycle
    gives ``P x_0 = lam^p x_0``, so the product eigenvalues are the ``p``-th
    powers of the pencil eigenvalues, each appearing ``p`` times; the copies
    are grouped back together greedily by distance.  Infinite eigenvalues come
    back as ``inf``.
    """
    mats = [np.asarray(a) for a in matrices]
    p = len(mats)
    if signs is None:
        signs = [1] * p
    n = mats[0].shape[0]
    if any(a.shape != (n, n) for a in mats):
        raise ContractError("cyclic_embedding_oracle needs square matrices of one size")
    dtype = np.result_type(*[a.dtype for a in mats], np.float64)
    big_a = np.zeros((p * n, p * n), dtype=dtype)
    big_b = np.zeros((p * n, p * n), dtype=dtype)

    def blk(i):
        return slice(i * n, (i + 1) * n)

    for k, (a, s) in enumerate(zip(mats, signs)):
        nxt = (k + 1) % p
        row = blk(k)  # one block row of equations per edge
        if s == 1:
            big_a[row, blk(k)] += a
            big_b[row, blk(nxt)] += np.eye(n)
        else:
            big_a[row, blk(k)] += np.eye(n)
            big_b[row, blk(nxt)] += a
    alpha, beta = scipy.linalg.eigvals(big_a, big_b, homogeneous_eigvals=True)
    infinite = np.abs(beta) <= 1e-13 * np.maximum(np.abs(alpha), 1e-300)
    powers = (alpha[~infinite] / beta[~infinite]) ** p
    n_inf = int(infinite.sum()) // p
    vals = list(_group_powers(powers, p)) if p > 1 else list(powers)
    return np.array(vals[: n - n_inf] + [complex(np.inf)] * n_inf, dtype=complex)


def _group_powers(powers, p):
    """Collapse a list in which every value appears ``p`` times (up to rounding)."""
    remaining = sorted(powers, key=lambda z: (-abs(z), z.real, z.imag))
    while remaining:
        v = remaining.pop(0)
        dist = [abs(w - v) for w in remaining]
        for _ in range(p - 1):
            if not remaining:
                break
            j = int(np.argmin(dist))
            remaining.pop(j)
            dist.pop(j)
        yield v


def charpoly(a, dps: int = 60) -> list:
    """Characteristic polynomial coefficients (leading first) in extended precision.

    Uses the Faddeev-LeVerrier recurrence, which is unstable in double
    precision but harmless at ``dps`` decimal digits for desk-sized matrices.
    """
    a = np.asarray(a)
    n = a.shape[0]
    with mpmath.workdps(dps):
        m = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in a])
        coeffs = [mpmath.mpf(1)]
        mk = mpmath.zeros(n, n)
        eye = mpmath.eye(n)
        for k in range(1, n + 1):
            mk = m * mk + coeffs[-1] * eye
            ak = m * mk
            c = -sum(ak[i, i] for i in range(n)) / k
            coeffs.append(c)
        return coeffs


def companion_eigenvalues(a, dps: int = 60) -> np.ndarray:
    """Eigenvalues of ``a`` as roots of its characteristic polynomial.

    The roots are those of the companion matrix of the polynomial, found by
    mpmath's simultaneous-iteration root finder in extended precision.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    coeffs = charpoly(a, dps)
    with mpmath.workdps(dps):
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * dps, roots_init=None)
    return np.array([complex(r) for r in roots], dtype=complex)


def match_spectra(x, y):
    """Pair two eigenvalue multisets optimally; returns ``(x_sorted, y_sorted)``.

    Infinite entries are paired with infinite entries first.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ContractError(f"spectra differ in size: {x.size} vs {y.size}")
    fx, fy = np.isfinite(x), np.isfinite(y)
    if fx.sum() != fy.sum():
        return x, y
    xf, yf = x[fx], y[fy]
    cost = np.abs(xf[:, None] - yf[None, :])
    r, c = linear_sum_assignment(cost)
    return np.concatenate([xf[r], x[~fx]]), np.concatenate([yf[c], y[~fy]])


def spectral_distance(x, y) -> float:
    """Largest relative error between optimally matched eigenvalues.

    ``|x_i - y_i| / max(|y_i|, floor)`` with ``floor = 1e-8 * max|y|`` so that
    exact zeros do not blow up the ratio.  Mismatched infinite counts give
    ``inf``.
    """
    xs, ys = match_spectra(x, y)
    if np.isfinite(xs).sum() != np.isfinite(ys).sum():
        return float("inf")
    fin = np.isfinite(ys)
    if not fin.any():
        return 0.0
    xs, ys = xs[fin], ys[fin]
    floor = 1e-8 * max(np.abs(ys).max(), 1e-300)
    return float(np.max(np.abs(xs - ys) / np.maximum(np.abs(ys), floor)))
