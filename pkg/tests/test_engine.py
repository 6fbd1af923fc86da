from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qschur.engine import (
    EngineOptions,
    Rejection,
    expected_shape,
    majority_direction,
    tree_step,
    triangularize,
)
from qschur.errors import DimensionError, IterationLimitError
from qschur.generate import generate
from qschur.linalg.householder import qr
from qschur.linalg.oracles import companion_eigenvalues, spectral_distance
from qschur.quiver import CycleInfo, Direction, Quiver, Representation, TreeStep, classify, plan_traversal
from qschur.shapes import Shape, ShapeClass
from qschur.verify import verify_all


def _cycle(signs, edges=None):
    p = len(signs)
    return CycleInfo(tuple(range(1, p + 1)), tuple(edges or range(1, p + 1)), tuple(signs))


def _plan(quiver):
    (comp,) = classify(quiver).components
    return plan_traversal(quiver, comp)


def _residual(d, quiver, rep, eid):
    e = quiver.edge(eid)
    return np.linalg.norm(d.Q[e.dst].conj().T @ rep[eid] @ d.Q[e.src] - d.T[eid])


# majority_direction


def test_majority_directed_three_cycle():
    assert majority_direction(_cycle((1, 1, 1))) == 1
    assert majority_direction(_cycle((-1, -1, -1))) == -1


def test_majority_tie_follows_lowest_edge():
    assert majority_direction(_cycle((1, -1))) == 1
    assert majority_direction(_cycle((1, -1), edges=(5, 2))) == -1


def test_majority_three_against_one():
    assert majority_direction(_cycle((1, 1, 1, -1))) == 1


# expected_shape


def test_square_loop_shapes():
    q = Quiver.from_lists([3], [(1, 1)])
    plan = _plan(q)
    assert expected_shape(1, plan, q, "real").tag is Shape.SQUARE_QUASI_UPPER
    assert expected_shape(1, plan, q, "complex").tag is Shape.SQUARE_UPPER


def test_tree_edge_to_larger_far_vertex_is_tall_a():
    q = Quiver.from_lists([3, 5], [(1, 2)])
    assert expected_shape(1, _plan(q), q, "real") == ShapeClass(Shape.TALL_A)


def test_tree_edge_into_root_uses_rq_family():
    q = Quiver.from_lists([3, 5], [(2, 1)])
    assert expected_shape(1, _plan(q), q, "real") == ShapeClass(Shape.WIDE_B)
    q = Quiver.from_lists([5, 3], [(2, 1)])
    assert expected_shape(1, _plan(q), q, "real") == ShapeClass(Shape.TALL_C)


# tree_step


def test_tree_step_identity():
    step = TreeStep(1, 1, 2, Direction.FROM_FIXED)
    free, t = tree_step(step, np.eye(3), np.eye(3))
    np.testing.assert_array_equal(free, np.eye(3))
    np.testing.assert_array_equal(t, np.eye(3))


def test_tree_step_antidiagonal_to_fixed():
    step = TreeStep(1, 2, 1, Direction.TO_FIXED)
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    free, t = tree_step(step, np.eye(2), a)
    np.testing.assert_allclose(np.abs(free), [[0, 1], [1, 0]], atol=1e-15)
    assert t[1, 0] == 0
    np.testing.assert_allclose(t @ free.T, a, atol=1e-15)


def test_tree_step_tall_from_fixed():
    a = np.random.default_rng(1).standard_normal((4, 2))
    free, t = tree_step(TreeStep(1, 1, 2, Direction.FROM_FIXED), np.eye(2), a)
    assert free.shape == (4, 4)
    assert np.all(t[ShapeClass(Shape.TALL_A).zero_mask(4, 2)] == 0)


# triangularize


def test_upper_triangular_loop_keeps_spectrum():
    a = np.triu(np.arange(1.0, 10.0).reshape(3, 3))
    q = Quiver.from_lists([3], [(1, 1)])
    d = triangularize(q, Representation({1: a}))
    assert np.all(np.tril(d.T[1], -1) == 0)
    assert spectral_distance(np.diag(d.T[1]), [1, 5, 9]) < 1e-14


def test_single_edge_is_qr_of_a():
    a = np.random.default_rng(2).standard_normal((3, 3))
    q = Quiver.from_lists([3, 3], [(1, 2)])
    d = triangularize(q, Representation({1: a}))
    q2, r = qr(a)
    np.testing.assert_array_equal(d.Q[1], np.eye(3))
    np.testing.assert_allclose(d.Q[2], q2, atol=1e-15)
    np.testing.assert_allclose(d.T[1], r, atol=1e-15)


def test_two_loops_rejected():
    q = Quiver.from_lists([2], [(1, 1), (1, 1)])
    out = triangularize(q, Representation({1: np.eye(2), 2: np.eye(2)}))
    assert isinstance(out, Rejection)
    assert out.evidence == ((1,), (2,))
    assert "two cycles" in out.message


def test_three_parallel_edges_rejected_but_pencil_accepted():
    q3, r3 = generate("parallel", dims=[2, 2], seed=0, field="real", d=3)
    assert isinstance(triangularize(q3, r3), Rejection)
    q2, r2 = generate("parallel", dims=[2, 2], seed=0, field="real", d=2)
    assert not isinstance(triangularize(q2, r2), Rejection)


def test_dimension_violation_raises():
    q = Quiver.from_lists([2, 3], [(1, 2)])
    with pytest.raises(DimensionError):
        triangularize(q, Representation({1: np.zeros((2, 3))}))


def test_cycle_trees_identity_matrices():
    q, _ = generate("cycle-trees", dims=[2] * 7, seed=0, field="real")
    rep = Representation({e.id: np.eye(2) for e in q.edges})
    d = triangularize(q, rep)
    for v in d.Q.values():
        np.testing.assert_array_equal(v, np.eye(2))
    for t in d.T.values():
        np.testing.assert_array_equal(t, np.eye(2))


def test_contragredient_preserves_product_spectrum():
    q, rep = generate("contragredient", dims=[4, 4], seed=3, field="real")
    d = triangularize(q, rep)
    assert verify_all(d, q, rep).passed
    prod = d.T[2] @ d.T[1]
    ev = np.linalg.eigvals(prod)
    assert spectral_distance(ev, companion_eigenvalues(rep[2] @ rep[1])) < 1e-6


def test_path_replays_two_qr_calls():
    rng = np.random.default_rng(4)
    a1, a2 = rng.standard_normal((3, 2)), rng.standard_normal((4, 3))
    q = Quiver.from_lists([2, 3, 4], [(1, 2), (2, 3)])
    d = triangularize(q, Representation({1: a1, 2: a2}))
    q2, r1 = qr(a1 @ np.eye(2))
    q3, r2 = qr(a2 @ q2)
    np.testing.assert_allclose(d.T[1], r1, atol=1e-14)
    np.testing.assert_allclose(d.T[2], r2, atol=1e-14)
    np.testing.assert_allclose(d.Q[3], q3, atol=1e-14)


def test_provenance_records_choices():
    q, rep = generate("cycle-trees", dims=[3, 3, 3, 2, 4, 5, 1], seed=2, field="real")
    d = triangularize(q, rep)
    (comp,) = d.provenance["components"]
    assert comp["cycle"]["vertices"] == [1, 2, 3]
    assert comp["cycle"]["carrier"] == comp["cycle"]["edges"][0]
    assert comp["cycle"]["majority"] in (1, -1)
    assert [s["free"] for s in comp["traversal"]][0] == 4


def test_iteration_limit_has_component_context():
    q, rep = generate("cycle", dims=[6], seed=1, field="real", length=3)
    with pytest.raises(IterationLimitError) as info:
        triangularize(q, rep, options=EngineOptions(max_iter=1))
    assert info.value.context["component"] == 0


def test_real_problem_over_complex_field_has_no_blocks():
    q, rep = generate("loop", dims=[5], seed=9, field="real")
    d = triangularize(q, rep, field="complex")
    assert np.all(np.tril(d.T[1], -1) == 0)
    assert verify_all(d, q, rep).passed


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(["edge", "tree", "contragredient", "cycle", "pseudotree"]),
    st.integers(0, 10_000),
)
def test_gauge_idempotence(template, seed):
    # Feeding T back in needs no further transformation beyond phases and
    # permutations of directions that the zero pattern leaves free.
    q, rep = generate(template, seed=seed, field="complex")
    d = triangularize(q, rep)
    rep2 = Representation(dict(d.T), "complex")
    d2 = triangularize(q, rep2)
    for v, f in d2.Q.items():
        mag = np.abs(f)
        np.testing.assert_allclose(mag, np.round(mag), atol=1e-8)
    assert d2.shapes == d.shapes
