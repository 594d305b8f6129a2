import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condstate import sampling
from condstate.errors import DimensionMismatchError, LabelCollisionError, LabelNotFoundError, ShapeError
from condstate.linalg import frob_distance, spectrum
from condstate.regions import (
    LabeledOperator,
    RegionSpace,
    block,
    embed,
    mul_all,
    padded_mul,
    partial_trace,
    partial_transpose,
    reduce_to,
    relabel,
    tensor,
)

from _helpers import SQ, ket

A, B, C = RegionSpace("A", 2), RegionSpace("B", 3), RegionSpace("C", 2)


def rand_op(g, regions):
    d = int(np.prod([r.dim for r in regions]))
    return LabeledOperator(regions, g.standard_normal((d, d)) + 1j * g.standard_normal((d, d)))


# --- construction ----------------------------------------------------------


def test_region_validation():
    with pytest.raises(ShapeError):
        RegionSpace("A", 0)
    with pytest.raises(ShapeError):
        RegionSpace("", 2)


def test_shape_mismatch_rejected():
    with pytest.raises(ShapeError):
        LabeledOperator((A, B), np.eye(5))


def test_duplicate_labels_rejected():
    with pytest.raises(LabelCollisionError):
        LabeledOperator((A, A), np.eye(4))


def test_canonical_order_permutes_entries():
    a = np.diag([1.0, 2.0])
    b = np.diag([10.0, 20.0, 30.0])
    ba = LabeledOperator((B, A), np.kron(b, a))
    assert ba.labels == ("A", "B")
    assert np.allclose(ba.matrix, np.kron(a, b))


def test_matrix_is_read_only():
    m = LabeledOperator.identity((A,))
    with pytest.raises(ValueError):
        m.matrix[0, 0] = 5


# --- tensor -----------------------------------------------------------------


def test_tensor_identities():
    out = tensor(LabeledOperator.identity((A,)), LabeledOperator.identity((B,)))
    assert out.labels == ("A", "B") and np.allclose(out.matrix, np.eye(6))


def test_tensor_diag_by_hand():
    a2, b2 = RegionSpace("A", 2), RegionSpace("B", 2)
    out = tensor(LabeledOperator.from_diag((a2,), [1, 0]), LabeledOperator.from_diag((b2,), [0, 1]))
    assert np.allclose(np.diag(out.matrix), [0, 1, 0, 0])


def test_tensor_symmetric_after_canonicalization(g):
    a, b = rand_op(g, (A,)), rand_op(g, (C,))
    assert frob_distance(tensor(a, b), tensor(b, a)) < 1e-14


def test_tensor_collision():
    with pytest.raises(LabelCollisionError):
        tensor(LabeledOperator.identity((A,)), LabeledOperator.identity((A,)))


# --- padded multiplication -------------------------------------------------


def test_padded_mul_disjoint_is_tensor(g):
    m, n = rand_op(g, (A,)), rand_op(g, (B,))
    assert frob_distance(padded_mul(m, n), tensor(m, n)) == 0


def test_padded_mul_by_hand():
    a = RegionSpace("A", 2)
    out = padded_mul(LabeledOperator((a,), ket(1, 0)), LabeledOperator((a,), ket(SQ, SQ)))
    assert np.allclose(out.matrix, 0.5 * np.array([[1, 1], [0, 0]]))


def test_padded_mul_identity_absorption(g):
    m = rand_op(g, (A, B))
    assert frob_distance(padded_mul(m, LabeledOperator.identity((C,))), embed(m, (A, B, C))) == 0


def test_padded_mul_matches_explicit_kron(g):
    m, n = rand_op(g, (A, B)), rand_op(g, (B, C))
    want = np.kron(m.matrix, np.eye(2)) @ np.kron(np.eye(2), n.matrix)
    assert np.allclose(padded_mul(m, n).matrix, want)


def test_padded_mul_dim_mismatch():
    with pytest.raises(DimensionMismatchError):
        padded_mul(LabeledOperator.identity((A,)), LabeledOperator.identity((RegionSpace("A", 3),)))


def test_padded_mul_associative(g):
    x, y, z = rand_op(g, (A, B)), rand_op(g, (B, C)), rand_op(g, (A, C))
    lhs = padded_mul(padded_mul(x, y), z)
    rhs = padded_mul(x, padded_mul(y, z))
    assert frob_distance(lhs, rhs) <= 1e-12 * np.linalg.norm(lhs.matrix)


# --- partial trace ------------------------------------------------------------


def test_partial_trace_product(g):
    ra = sampling.random_density(g, A)
    rb = sampling.random_density(g, B)
    assert frob_distance(partial_trace(tensor(ra, rb), {"B"}), ra) < 1e-14


def test_partial_trace_max_entangled():
    a, b = RegionSpace("A", 2), RegionSpace("B", 2)
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    out = partial_trace(LabeledOperator((a, b), np.outer(phi, phi)), {"B"})
    assert np.allclose(out.matrix, np.eye(2) / 2)


def test_full_trace_is_scalar(g):
    m = rand_op(g, (A, B))
    out = partial_trace(m, {"A", "B"})
    assert out.labels == () and np.isclose(out.item(), m.trace())


def test_partial_trace_einsum_oracle(g):
    m = rand_op(g, (A, B, C))
    t = m.matrix.reshape(2, 3, 2, 2, 3, 2)
    assert np.allclose(partial_trace(m, {"B"}).matrix, np.einsum("abcdbf->acdf", t).reshape(4, 4))
    assert np.allclose(reduce_to(m, {"B"}).matrix, np.einsum("abcaec->be", t))


def test_partial_trace_unknown_label(g):
    with pytest.raises(LabelNotFoundError):
        partial_trace(rand_op(g, (A,)), {"Z"})


# --- partial transpose ---------------------------------------------------------


def test_partial_transpose_product(g):
    ra, rb = rand_op(g, (A,)), rand_op(g, (B,))
    out = partial_transpose(tensor(ra, rb), {"A"})
    assert np.allclose(out.matrix, np.kron(ra.matrix.T, rb.matrix))


def test_partial_transpose_of_phi_is_half_swap():
    a, b = RegionSpace("A", 2), RegionSpace("B", 2)
    phi = np.array([1, 0, 0, 1.0])
    out = partial_transpose(LabeledOperator((a, b), np.outer(phi, phi) / 2), {"A"})
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(out.matrix, swap / 2)
    assert np.isclose(spectrum(out).eigenvalues[-1], -0.5)


def test_partial_transpose_preserves_trace_and_hermiticity(g):
    rho = sampling.random_density(g, (A, B))
    out = partial_transpose(rho, {"B"})
    assert np.isclose(out.trace(), 1)
    assert np.allclose(out.matrix, out.matrix.conj().T)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mask=st.sets(st.sampled_from("ABC"), min_size=1))
def test_partial_transpose_involution(seed, mask):
    m = rand_op(sampling.rng(seed), (A, B, C))
    assert frob_distance(partial_transpose(partial_transpose(m, mask), mask), m) == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.sampled_from("ABC"), t=st.sampled_from("ABC"))
def test_transpose_commutes_with_trace(seed, s, t):
    if s == t:
        return
    m = rand_op(sampling.rng(seed), (A, B, C))
    lhs = partial_trace(partial_transpose(m, {s}), {t})
    rhs = partial_transpose(partial_trace(m, {t}), {s})
    assert frob_distance(lhs, rhs) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), traced=st.sets(st.sampled_from("ABC")))
def test_partial_trace_preserves_trace(seed, traced):
    m = rand_op(sampling.rng(seed), (A, B, C))
    out = partial_trace(m, traced)
    assert abs(out.trace() - m.trace()) <= 1e-12 * max(1, abs(m.trace()))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), perm=st.permutations([0, 1, 2]))
def test_canonicalization_order_independent(seed, perm):
    g = sampling.rng(seed)
    ops = [rand_op(g, (r,)) for r in (A, B, C)]
    regions = [ops[i].regions[0] for i in perm]
    mat = ops[perm[0]].matrix
    for i in perm[1:]:
        mat = np.kron(mat, ops[i].matrix)
    m = LabeledOperator(regions, mat)
    ref = mul_all(*ops)
    assert frob_distance(m, ref) < 1e-12
    again = LabeledOperator(m.regions, m.matrix)
    assert np.array_equal(again.matrix, m.matrix)


# --- misc ------------------------------------------------------------------


def test_relabel_and_block(g):
    m = rand_op(g, (A, B))
    r = relabel(m, {"A": "Z"})
    assert r.labels == ("B", "Z")
    assert np.allclose(reduce_to(r, {"Z"}).matrix, reduce_to(m, {"A"}).matrix)
    blk = block(m, "A", 1, 0)
    assert np.allclose(blk.matrix, m.matrix[3:, :3])


def test_relabel_dim_mismatch(g):
    with pytest.raises(DimensionMismatchError):
        relabel(rand_op(g, (A,)), {"A": RegionSpace("Q", 3)})


def test_sum_pads_identities():
    s = LabeledOperator.identity((A,)) + LabeledOperator.identity((RegionSpace("B", 2),))
    assert np.allclose(s.matrix, 2 * np.eye(4))
