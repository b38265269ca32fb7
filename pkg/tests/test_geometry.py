import math

import pytest
from hypothesis import given, strategies as st

from mixedsmooth.errors import DomainError
from mixedsmooth.geometry import (
    AxisTransform,
    IndexSubset,
    Rectangle,
    binomial,
    enumerate_subsets,
    normalize_pair,
    sub_rectangle,
    subsets_by_cardinality,
)


def test_enumerate_n1():
    subs = enumerate_subsets(1)
    assert [s.indices for s in subs] == [(1,)]


def test_enumerate_n3_order_and_count():
    subs = enumerate_subsets(3)
    assert len(subs) == 7
    assert [s.indices for s in subs] == [
        (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3),
    ]


def test_enumerate_cardinality_groups_n4():
    groups = subsets_by_cardinality(enumerate_subsets(4))
    assert len(groups[2]) == 6


@pytest.mark.parametrize("n", range(1, 13))
def test_counts_exact(n):
    subs = enumerate_subsets(n)
    assert len(subs) == 2 ** n - 1
    groups = subsets_by_cardinality(subs)
    for k in range(1, n + 1):
        assert len(groups[k]) == binomial(n, k)


@pytest.mark.parametrize("n", [0, -1, 21, 2.0])
def test_enumerate_rejects_bad_dimension(n):
    with pytest.raises(DomainError):
        enumerate_subsets(n)


def test_subset_canonical_under_permutation():
    a = IndexSubset((3, 1, 2), 4)
    b = IndexSubset((1, 2, 3), 4)
    assert a == b and a.indices == (1, 2, 3)


def test_subset_validation():
    with pytest.raises(DomainError):
        IndexSubset((), 3)
    with pytest.raises(DomainError):
        IndexSubset((1, 1), 3)
    with pytest.raises(DomainError):
        IndexSubset((4,), 3)


def test_binomial_recurrence():
    for m in range(1, 31):
        for j in range(1, m + 1):
            assert binomial(m, j) + binomial(m, j - 1) == binomial(m + 1, j)


def test_sub_rectangle_segment():
    P = Rectangle((0.0, 0.0), (1.0, 2.0))
    sr = sub_rectangle(P, IndexSubset((2,), 2))
    assert sr.base == (0.0, 0.0)
    assert sr.free_ranges() == [(0.0, 2.0)]


def test_sub_rectangle_full_is_parent():
    P = Rectangle((0.0, 0.0), (1.0, 2.0))
    sr = sub_rectangle(P, IndexSubset((1, 2), 2))
    assert sr.free_ranges() == [(0.0, 1.0), (0.0, 2.0)]


def test_sub_rectangle_face_of_cube():
    P = Rectangle.unit(3)
    sr = sub_rectangle(P, IndexSubset((1, 3), 3))
    assert sr.base == (0.0, 0.0, 0.0)
    assert sr.free_ranges() == [(0.0, 1.0), (0.0, 1.0)]


def test_sub_rectangle_dimension_mismatch():
    with pytest.raises(DomainError):
        sub_rectangle(Rectangle.unit(2), IndexSubset((1,), 3))


def test_rectangle_validation():
    with pytest.raises(DomainError):
        Rectangle((0.0,), (0.0,))
    with pytest.raises(DomainError):
        Rectangle((0.0, 1.0), (1.0,))
    assert Rectangle.from_flat([0, 1, 0, 2]).edges == (1.0, 2.0)


def test_normalize_pair_reflection():
    np_ = normalize_pair((0.0, 1.0), (1.0, 0.0))
    assert np_.transform.flips == (False, True)
    assert np_.rectangle.lo == (0.0, -1.0)
    assert np_.rectangle.hi == (1.0, 0.0)
    assert np_.dropped_axes == ()


def test_normalize_pair_dropped_axis():
    np_ = normalize_pair((0.0, 0.0), (1.0, 0.0))
    assert np_.dropped_axes == (2,)
    assert np_.kept_axes == (1,)
    assert np_.rectangle.lo == (0.0,) and np_.rectangle.hi == (1.0,)


def test_normalize_pair_empty():
    np_ = normalize_pair((3.0, 3.0), (3.0, 3.0))
    assert np_.empty and np_.rectangle is None
    assert np_.dropped_axes == (1, 2)


def test_normalize_pair_length_mismatch():
    with pytest.raises(DomainError):
        normalize_pair((0.0,), (1.0, 2.0))


def test_axis_transform_involution():
    t = AxisTransform((True, False, True))
    p = (1.5, -2.0, 3.0)
    assert t.apply(t.apply(p)) == p


@given(
    st.lists(
        st.floats(min_value=-10, max_value=10, allow_nan=False),
        min_size=1,
        max_size=5,
    ),
    st.lists(
        st.floats(min_value=-10, max_value=10, allow_nan=False),
        min_size=1,
        max_size=5,
    ),
)
def test_normalize_pair_roundtrip(xs, ys):
    n = min(len(xs), len(ys))
    x, y = tuple(xs[:n]), tuple(ys[:n])
    norm = normalize_pair(x, y)
    if norm.empty:
        assert all(a == b for a, b in zip(x, y))
        return
    # reflecting the transformed corners back recovers the original pair
    # on every non-dropped axis
    for pos, axis in enumerate(norm.kept_axes):
        lo = norm.rectangle.lo[pos]
        hi = norm.rectangle.hi[pos]
        flip = norm.transform.flips[axis - 1]
        back = {-lo, -hi} if flip else {lo, hi}
        assert back == {x[axis - 1], y[axis - 1]}
