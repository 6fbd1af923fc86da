from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qschur.errors import ContractError, UnsupportedCycleError
from qschur.linalg.householder import qr_pattern
from qschur.linalg.oracles import spectral_distance
from qschur.linalg.rectangular import cycle_dims, rectangular_cycle_compress


def _edge_ends(k, s, p):
    return (k, (k + 1) % p) if s == 1 else ((k + 1) % p, k)


def _check(res, mats, signs, tol=1e-10):
    p = len(mats)
    for k, (a, s) in enumerate(zip(mats, signs)):
        src, dst = _edge_ends(k, s, p)
        resid = np.linalg.norm(res.Q[dst].conj().T @ a @ res.Q[src] - res.T[k])
        assert resid <= tol * max(1, np.linalg.norm(a))
    for q in res.Q:
        assert np.linalg.norm(q.conj().T @ q - np.eye(q.shape[0])) <= 1e-12 * q.shape[0]


def test_zero_return_map():
    rng = np.random.default_rng(0)
    mats = [rng.standard_normal((3, 2)), np.zeros((2, 3))]
    res = rectangular_cycle_compress(mats, [1, 1])
    assert res.core_dim == 2
    _check(res, mats, [1, 1])
    tall, wide = res.T
    assert tall.shape == (3, 2) and wide.shape == (2, 3)
    assert np.all(tall[qr_pattern(3, 2)] == 0)
    assert np.all(wide[qr_pattern(2, 3)] == 0)


def test_contragredient_4_by_2():
    rng = np.random.default_rng(42)
    mats = [rng.standard_normal((4, 2)), rng.standard_normal((2, 4))]
    res = rectangular_cycle_compress(mats, [1, 1], "complex")
    _check(res, mats, [1, 1])
    for t in res.T:
        assert np.all(t[qr_pattern(*t.shape)] == 0)
    # The nonzero spectrum of A2 A1 lives in the core.
    assert spectral_distance(res.core.eigenvalues(), np.linalg.eigvals(mats[1] @ mats[0])) < 1e-10


def test_mixed_directions_rejected():
    mats = [np.ones((3, 2)), np.ones((3, 2))]
    with pytest.raises(UnsupportedCycleError):
        rectangular_cycle_compress(mats, [1, -1])


def test_loop_is_not_a_rectangular_cycle():
    with pytest.raises(ContractError):
        rectangular_cycle_compress([np.eye(2)], [1])


def test_inconsistent_dims():
    with pytest.raises(ContractError):
        cycle_dims([np.zeros((3, 2)), np.zeros((3, 3))], [1, 1])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(1, 8), min_size=2, max_size=5),
    st.sampled_from([1, -1]),
    st.booleans(),
    st.integers(0, 2**32 - 1),
)
def test_directed_cycles(dims, sign, cplx, seed):
    rng = np.random.default_rng(seed)
    p = len(dims)
    mats = []
    for k in range(p):
        src, dst = _edge_ends(k, sign, p)
        a = rng.standard_normal((dims[dst], dims[src]))
        if cplx:
            a = a + 1j * rng.standard_normal(a.shape)
        mats.append(a)
    res = rectangular_cycle_compress(mats, [sign] * p, carrier=int(rng.integers(p)))
    _check(res, mats, [sign] * p)
    assert res.core_dim == min(dims)
    for k, t in enumerate(res.T):
        mask = qr_pattern(*t.shape)
        if not cplx and k == res.core.quasi_block_index:
            mask &= ~np.eye(*t.shape, k=-1, dtype=bool)
        assert np.all(t[mask] == 0)
