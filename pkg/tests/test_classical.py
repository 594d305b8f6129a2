import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condstate.classical import (
    ClassicalConditionalTable,
    ClassicalDistribution,
    classical_blocks,
    embed_classical,
    extract_classical,
    oracle_bayes,
    oracle_conditional,
)
from condstate.errors import ClassicalityError, StateError
from condstate.regions import LabeledOperator, RegionSpace


def test_distribution_embeds_diagonally():
    op = embed_classical(ClassicalDistribution(("R",), [0.3, 0.7]))
    assert np.allclose(op.matrix, np.diag([0.3, 0.7]))
    assert op.regions[0].classical


def test_identity_table_embeds_as_copy():
    c = embed_classical(ClassicalConditionalTable(("S",), ("R",), np.eye(2)))
    assert np.allclose(c.op.matrix, np.diag([1, 0, 0, 1]))
    assert c.validate()


def test_distribution_validation():
    with pytest.raises(StateError):
        ClassicalDistribution(("R",), [0.5, 0.6])
    with pytest.raises(StateError):
        ClassicalDistribution(("R",), [1.5, -0.5])


def test_table_columns_must_sum_to_one():
    with pytest.raises(StateError):
        ClassicalConditionalTable(("S",), ("R",), [[0.5, 0.5], [0.6, 0.5]])


def test_undefined_columns_must_be_zero():
    with pytest.raises(StateError):
        ClassicalConditionalTable(("S",), ("R",), [[1, 0.5], [0, 0]], defined=[True, False])
    t = ClassicalConditionalTable(("S",), ("R",), [[1, 0], [0, 0]], defined=[True, False])
    c = embed_classical(t)
    assert np.allclose(c.support_op().matrix, np.diag([1, 0]))
    assert c.validate()


def dyadic_tables(n=2, quanta=4):
    for counts in itertools.product(range(quanta + 1), repeat=n * n):
        if sum(counts) == quanta:
            yield np.array(counts, float).reshape(n, n) / quanta


@pytest.mark.parametrize("t", list(dyadic_tables()))
def test_round_trip_exact_for_dyadic_joints(t):
    d = ClassicalDistribution(("R", "S"), t)
    back = extract_classical(embed_classical(d))
    assert np.array_equal(back.table, t)


def test_round_trip_conditional_table():
    cond, defined = oracle_conditional(np.array([[0.25, 0.25], [0.0, 0.5]]), 1)
    t = ClassicalConditionalTable(("S",), ("R",), cond, defined)
    back = extract_classical(embed_classical(t))
    assert np.array_equal(back.table, cond) and np.array_equal(back.defined, defined)


def test_extract_rejects_coherence():
    r = RegionSpace("R", 2, True)
    with pytest.raises(ClassicalityError):
        extract_classical(LabeledOperator((r,), [[0.5, 0.1], [0.1, 0.5]]))


def test_classical_blocks_detect_off_block_weight():
    x, a = RegionSpace("X", 2, True), RegionSpace("A", 2)
    m = np.eye(4) / 4
    m[0, 1] = m[1, 0] = 0.1  # order (A, X): indices 0 and 1 differ only in X
    with pytest.raises(ClassicalityError):
        classical_blocks(LabeledOperator((a, x), m), "X")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=4, max_size=4).filter(lambda v: sum(v) > 0))
def test_oracle_bayes_reverses(counts):
    joint = np.array(counts, float).reshape(2, 2) / sum(counts)  # [r, s]
    cond_sr, _ = oracle_conditional(joint, 1)
    p_r = joint.sum(axis=1)
    rs, defined = oracle_bayes(cond_sr, p_r)
    want, want_def = oracle_conditional(joint.T, 1)  # P(r|s), axes [r, s]
    assert np.array_equal(defined, want_def)
    assert np.allclose(rs, want)
