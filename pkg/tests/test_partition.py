import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deppart.partition import (
    EMPTY,
    Partition,
    ResourceLimitError,
    adjusted_rand_index,
    ari_batch,
    canonicalize,
    canonicalize_rows,
    co_clustered_pairs,
    enumerate_partitions,
    is_compatible,
    restrict,
)
from oracles import ari_pairs

labels_st = st.lists(st.integers(0, 6), min_size=1, max_size=10)


@pytest.mark.parametrize("raw, expected", [
    ((7, 7, 2), (1, 1, 2)),
    ((1, 2, 3), (1, 2, 3)),
    ((3, 1, 3, 1), (1, 2, 1, 2)),
])
def test_canonicalize_examples(raw, expected):
    assert canonicalize(raw).labels == expected


def test_canonicalize_empty_rejected():
    with pytest.raises(ValueError):
        canonicalize([])


def test_partition_rejects_noncanonical():
    with pytest.raises(ValueError):
        Partition((2, 1))
    with pytest.raises(ValueError):
        Partition((1, 3))


def test_partition_derived_fields():
    p = Partition((1, 2, 1, 3, 2))
    assert p.m == 5 and p.k == 3
    assert p.sizes == (2, 2, 1)
    assert p.blocks() == [[0, 2], [1, 4], [3]]


@given(labels_st)
def test_canonicalize_idempotent_and_preserves_comembership(raw):
    p = canonicalize(raw)
    assert canonicalize(p.labels) == p
    n = len(raw)
    for i in range(n):
        for j in range(n):
            assert (raw[i] == raw[j]) == (p[i] == p[j])


@given(st.lists(st.lists(st.integers(0, 5), min_size=4, max_size=4), min_size=1, max_size=6))
def test_canonicalize_rows_matches_scalar(rows):
    arr = np.array(rows)
    out = canonicalize_rows(arr)
    for r, row in enumerate(rows):
        assert tuple(out[r]) == canonicalize(row).labels


@pytest.mark.parametrize("p, q, expected", [
    ((1, 1, 2, 2), (1, 1, 2, 2), 1.0),
    ((1, 1, 2, 2), (1, 2, 1, 2), -0.5),
    ((1, 2, 3), (1, 1, 1), 0.0),
])
def test_ari_examples(p, q, expected):
    assert adjusted_rand_index(p, q) == pytest.approx(expected, abs=1e-12)
    assert ari_pairs(p, q) == pytest.approx(expected, abs=1e-12)


def test_ari_size_mismatch():
    with pytest.raises(ValueError):
        adjusted_rand_index((1, 1), (1, 1, 1))


@given(labels_st, st.data())
def test_ari_matches_pair_oracle(raw_p, data):
    raw_q = data.draw(st.lists(st.integers(0, 4), min_size=len(raw_p), max_size=len(raw_p)))
    p, q = canonicalize(raw_p), canonicalize(raw_q)
    val = adjusted_rand_index(p, q)
    assert val == pytest.approx(ari_pairs(p.labels, q.labels), abs=1e-12)
    assert val == pytest.approx(adjusted_rand_index(q, p), abs=1e-12)
    assert adjusted_rand_index(p, p) == 1.0
    batch = ari_batch(np.array([p.labels]), np.array([q.labels]))[0]
    assert batch == pytest.approx(val, abs=1e-12)


@given(labels_st, st.permutations(list(range(7))))
def test_ari_label_permutation_invariant(raw, perm):
    p = canonicalize(raw)
    relabelled = [perm[x] for x in raw]
    q = canonicalize([(x * 3) % 5 for x in raw])
    assert adjusted_rand_index(relabelled, q) == pytest.approx(adjusted_rand_index(p, q), abs=1e-12)


def test_ari_degenerate_conventions():
    assert adjusted_rand_index((1, 2, 3), (1, 2, 3)) == 1.0
    assert adjusted_rand_index((1, 1, 1), (1, 1, 1)) == 1.0
    assert adjusted_rand_index((1,), (1,)) == 1.0


@pytest.mark.parametrize("p, keep, expected", [
    ((1, 1, 2), [0, 1], (1, 1)),
    ((1, 2, 1, 3), [1, 2, 3], (1, 2, 3)),
    ((1, 2, 2), [], ()),
])
def test_restrict_examples(p, keep, expected):
    assert restrict(p, keep).labels == expected


def test_restrict_conventions_and_errors():
    p = Partition((1, 2, 1))
    assert restrict(p, range(3)) == p
    assert restrict(p, []) == EMPTY
    with pytest.raises(ValueError):
        restrict(p, [3])


@given(labels_st, st.data())
def test_restrict_composes(raw, data):
    p = canonicalize(raw)
    m = p.m
    A = sorted(data.draw(st.sets(st.integers(0, m - 1))))
    B_local = sorted(data.draw(st.sets(st.integers(0, max(len(A) - 1, 0)))) if A else [])
    B_local = [b for b in B_local if b < len(A)]
    lhs = restrict(restrict(p, A), B_local)
    rhs = restrict(p, [A[b] for b in B_local])
    assert lhs == rhs


@pytest.mark.parametrize("rho_t, rho_prev, gamma, expected", [
    ((1, 1, 1), (1, 1, 2), (1, 1, 0), True),
    ((1, 2, 1), (1, 1, 2), (1, 1, 0), False),
    ((1, 1, 1), (1, 2, 3), (0, 0, 0), True),
    ((1, 2, 2), (1, 2, 3), (0, 0, 0), True),
])
def test_compatibility_examples(rho_t, rho_prev, gamma, expected):
    assert is_compatible(rho_t, rho_prev, gamma) is expected


@settings(max_examples=200)
@given(st.integers(1, 6).flatmap(lambda m: st.tuples(
    st.lists(st.integers(0, 3), min_size=m, max_size=m),
    st.lists(st.integers(0, 3), min_size=m, max_size=m),
    st.lists(st.integers(0, 1), min_size=m, max_size=m))), st.integers(0, 5))
def test_compatibility_symmetric_and_monotone(args, flip):
    a, b, g = args
    ok = is_compatible(a, b, g)
    assert ok == is_compatible(b, a, g)
    if ok and flip < len(g):
        g2 = list(g)
        g2[flip] = 0
        assert is_compatible(a, b, g2)


def test_enumerate_partitions_counts_and_order():
    assert [p.labels for p in enumerate_partitions(1)] == [(1,)]
    three = [p.labels for p in enumerate_partitions(3)]
    # same rows as the worked three-unit example: {123}, {12}{3}, {13}{2}, {1}{23}, {1}{2}{3}
    assert three == [(1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2), (1, 2, 3)]
    bell = [1, 1, 2, 5, 15, 52, 203, 877]
    for m in range(8):
        parts = enumerate_partitions(m)
        assert len(parts) == bell[m]
        assert len(set(parts)) == bell[m]


def test_enumerate_partitions_guard():
    with pytest.raises(ResourceLimitError):
        enumerate_partitions(13)


def test_co_clustered_pairs():
    assert co_clustered_pairs((1, 2, 1, 2)) == {(0, 2), (1, 3)}
