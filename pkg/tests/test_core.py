import numpy as np
import pytest

from bounded_markov.core import (BoundsGrid, DesignMatrix, FiberSpec, Shape, Table, margins,
                                 quasi_independence_design, satisfies_bounds, two_way_design)


def test_shape_indexing_roundtrip():
    s = Shape(3, 4)
    assert [s.cell(s.index(i, j)) for i, j in s.cells()] == s.cells()
    assert s.flat([(0, 0), 5, (2, 3)]) == {0, 5, 11}
    with pytest.raises(IndexError):
        s.index(3, 0)
    with pytest.raises(ValueError):
        Shape(0, 2)


def test_table_validation():
    t = Table.from_rows([[1, 2], [3, 4]])
    assert t[(1, 0)] == 3 and t.total == 10
    assert t.to_array().tolist() == [[1, 2], [3, 4]]
    with pytest.raises(ValueError):
        Table(Shape(1, 2), (1, -1))
    with pytest.raises(ValueError):
        Table(Shape(1, 2), (1,))


def test_bounds_grid():
    s = Shape(2, 2)
    b = BoundsGrid.with_zeros(s, [(0, 0)], base=3)
    assert b.bounds == (0, 3, 3, 3)
    assert b.zeros == {0} and b.bounded_cells == {0, 1, 2, 3}
    assert BoundsGrid.unbounded(s).bounded_cells == frozenset()
    assert BoundsGrid.with_zeros(s, [(0, 0), (0, 1)]).full_zero_lines() == ([0], [])
    with pytest.raises(ValueError):
        BoundsGrid(s, (1, 2, 3))


def test_two_way_design_margins():
    A = two_way_design(Shape(2, 3))
    assert (A.s, A.k) == (5, 6)
    t = Table.from_rows([[1, 0, 2], [0, 3, 1]])
    assert margins(t, A).tolist() == [3, 4, 1, 3, 3]


def test_quasi_independence_drops_zero_columns():
    A = quasi_independence_design(Shape(2, 2), [(0, 0)])
    assert A.k == 3 and A.labels == (1, 2, 3)
    assert np.array_equal(A.entries, two_way_design(Shape(2, 2)).entries[:, [1, 2, 3]])
    with pytest.raises(ValueError):
        quasi_independence_design(Shape(1, 1), [(0, 0)])


def test_design_matrix_rejects_negative_and_is_readonly():
    with pytest.raises(ValueError):
        DesignMatrix(np.array([[1, -1]]))
    A = DesignMatrix(np.array([[1, 1]]))
    with pytest.raises(ValueError):
        A.entries[0, 0] = 2


def test_fiber_spec_contains():
    t = Table.from_rows([[1, 0], [0, 1]])
    spec = FiberSpec.from_table(t)
    assert spec.contains(Table.from_rows([[0, 1], [1, 0]]))
    assert not spec.contains(Table.from_rows([[2, 0], [0, 0]]))
    bounded = FiberSpec.from_table(t, bounds=BoundsGrid.with_zeros(t.shape, [(0, 1)]))
    assert not bounded.contains(Table.from_rows([[0, 1], [1, 0]]))
    assert satisfies_bounds(t, BoundsGrid.uniform(t.shape, 1))
    with pytest.raises(ValueError):
        FiberSpec.two_way((1, 1), (1, 1), BoundsGrid.unbounded(Shape(3, 3)))
    with pytest.raises(ValueError):
        FiberSpec.two_way((1, -1), (0, 0))
