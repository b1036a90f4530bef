import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wban_exposure.geometry import GridSpec, NodePosition, angle_between, distance, grid_cells

coords = st.builds(NodePosition, st.integers(1, 16), st.integers(1, 15))


def test_distance_examples():
    assert distance((1, 1), (1, 1)) == 0.0
    # sqrt(14^2 + 14^2) cm, sqrt(4^2 + 5^2) cm
    assert distance((1, 1), (15, 15)) == pytest.approx(0.19798989873223331, abs=1e-15)
    assert distance((1, 1), (5, 6)) == pytest.approx(0.064031242374328487, abs=1e-15)
    assert round(distance((1, 1), (15, 15)), 5) == 0.19799
    assert round(distance((1, 1), (5, 6)), 5) == 0.06403


def test_distance_cell_size():
    assert distance((1, 1), (4, 5), cell_size_cm=2) == pytest.approx(0.10)


@given(coords, coords, coords)
def test_distance_is_metric(a, b, c):
    assert distance(a, b) >= 0
    assert distance(a, b) == distance(b, a)
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-15


def test_angle_examples():
    assert angle_between((1, 1), (5, 1), (5, 1)) == 0.0
    assert angle_between((1, 1), (5, 1), (1, 5)) == pytest.approx(90.0)
    assert angle_between((1, 1), (15, 15), (5, 6)) == pytest.approx(6.3401917459099094, abs=1e-12)


def test_angle_degenerate():
    with pytest.raises(ValueError):
        angle_between((1, 1), (1, 1), (2, 2))
    with pytest.raises(ValueError):
        angle_between((1, 1), (2, 2), (1, 1))


@given(coords, coords, coords)
def test_angle_symmetric_and_bounded(o, a, b):
    if a == o or b == o:
        return
    ab = angle_between(o, a, b)
    assert ab == angle_between(o, b, a)
    assert 0.0 <= ab <= 180.0


def test_grid_cells_counts():
    g = GridSpec()
    assert len(grid_cells(g)) == 240
    assert len(grid_cells(g, {NodePosition(1, 1), NodePosition(15, 15)})) == 238


def test_grid_cells_small_order():
    assert grid_cells(GridSpec(2, 2)) == [(1, 1), (2, 1), (1, 2), (2, 2)]


@given(st.sets(st.tuples(st.integers(-2, 20), st.integers(-2, 20)), max_size=20))
def test_grid_cells_cardinality(excluded):
    g = GridSpec()
    on_grid = {p for p in excluded if g.contains(NodePosition(*p))}
    assert len(grid_cells(g, excluded)) == 240 - len(on_grid)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 15)
    with pytest.raises(ValueError):
        GridSpec(16, 15, 0)
    with pytest.raises(ValueError):
        GridSpec().check(NodePosition(17, 1))
    assert GridSpec(16, 15, 2).shape == (8, 7)
    assert math.isclose(distance((1, 1), (2, 1), GridSpec(16, 15, 2).cell_size_cm), 0.02)
