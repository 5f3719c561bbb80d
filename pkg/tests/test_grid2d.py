import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from consensuslab.grid2d import (MOORE, VON_NEUMANN, exact_density_grid,
                                 evolve2d, final_density_curve2d, gkl2d,
                                 is_uniform2d, majority_code,
                                 quiescent_extremes2d, random_grid,
                                 sampled_majority2d, settle2d, spacetime_slice,
                                 step2d, totalistic2d)

grids = st.tuples(st.integers(3, 10), st.integers(3, 10)).flatmap(
    lambda hw: st.lists(st.integers(0, 1), min_size=hw[0] * hw[1],
                        max_size=hw[0] * hw[1]).map(
        lambda bits: np.array(bits, dtype=np.uint8).reshape(hw)))


def test_neighborhood_definitions():
    assert len(VON_NEUMANN) == 5 and (0, 0) in VON_NEUMANN
    assert len(MOORE) == 9 and (0, 0) in MOORE


def test_code_56_is_five_cell_majority():
    rule = totalistic2d("vonneumann5", 56)
    assert rule.code == majority_code("vonneumann5")
    assert tuple(rule.output_per_total) == (0, 0, 0, 1, 1, 1)


def test_code_976_differs_from_majority_at_totals_4_and_5():
    majority = totalistic2d("moore9", majority_code("moore9"))
    skewed = totalistic2d("moore9", 976)
    diffs = [t for t in range(10)
             if majority.output_per_total[t] != skewed.output_per_total[t]]
    assert diffs == [4, 5]


def test_totalistic_validation():
    with pytest.raises(ValueError):
        totalistic2d("hex7", 56)
    with pytest.raises(ValueError):
        totalistic2d("vonneumann5", 64)


def test_sampled_majority2d_validation():
    with pytest.raises(ValueError):
        sampled_majority2d(((0, 0), (0, 1)))
    with pytest.raises(ValueError):
        sampled_majority2d(((0, 0), (0, 0), (0, 1)))


@given(grids, st.integers(0, 9), st.integers(0, 9))
def test_step2d_commutes_with_torus_shifts(grid, dy, dx):
    rule = totalistic2d("vonneumann5", 56)
    shifted_then_stepped = step2d(np.roll(grid, (dy, dx), (0, 1)), rule)
    stepped_then_shifted = np.roll(step2d(grid, rule), (dy, dx), (0, 1))
    assert np.array_equal(shifted_then_stepped, stepped_then_shifted)


def test_solid_block_is_fixed_under_five_cell_majority():
    grid = np.zeros((6, 6), dtype=np.uint8)
    grid[2:4, 2:4] = 1
    stepped = step2d(grid, totalistic2d("vonneumann5", 56))
    assert np.array_equal(stepped, grid)


def test_two_axis_rule_polls_the_axes_the_center_selects():
    rule = gkl2d()
    grid = np.zeros((5, 5), dtype=np.uint8)
    # Center 0 polls east and south: both 1 pushes the cell to 1.
    grid[2, 3] = grid[3, 2] = 1
    assert step2d(grid, rule)[2, 2] == 1
    # Center 1 polls north and west: both 0 pulls the cell to 0.
    grid = np.zeros((5, 5), dtype=np.uint8)
    grid[2, 2] = 1
    assert step2d(grid, rule)[2, 2] == 0
    for uniform in (np.zeros((4, 4), np.uint8), np.ones((4, 4), np.uint8)):
        assert np.array_equal(step2d(uniform, rule), uniform)


def test_settle2d_detects_fixed_points_and_blinkers():
    block = np.zeros((6, 6), dtype=np.uint8)
    block[2:4, 2:4] = 1
    final, steps, kind = settle2d(block, totalistic2d("vonneumann5", 56), 10)
    assert kind == "fixed" and steps == 0
    # Code 1 maps the all-0 grid to all-1 and back.
    blinker = np.zeros((4, 4), dtype=np.uint8)
    final, steps, kind = settle2d(blinker, totalistic2d("vonneumann5", 1), 10)
    assert kind == "period2"
    running = random_grid(16, 16, 0.3, 2)
    _, _, kind = settle2d(running, totalistic2d("moore9", 976), 0)
    assert kind == "running"


def test_evolve2d_history_and_slice():
    grid = random_grid(8, 10, 0.4, 7)
    history = evolve2d(grid, totalistic2d("vonneumann5", 56), 5)
    assert len(history) == 6
    sl = spacetime_slice(history, 3)
    assert sl.shape == (6, 10)
    assert np.array_equal(sl[0], grid[3])


def test_quiescent_extremes():
    assert quiescent_extremes2d(totalistic2d("vonneumann5", 56))
    assert not quiescent_extremes2d(totalistic2d("vonneumann5", 1))


@given(st.integers(2, 20), st.integers(2, 20),
       st.floats(0.0, 1.0, allow_nan=False))
def test_exact_density_grid_ones_count(h, w, p):
    grid = exact_density_grid(h, w, p, 0)
    assert grid.shape == (h, w)
    assert int(grid.sum()) == round(p * h * w)


def test_uniformity_check():
    assert is_uniform2d(np.ones((3, 3), dtype=np.uint8))
    assert not is_uniform2d(np.eye(3, dtype=np.uint8))


def test_density_curve2d_is_monotone_for_asymmetric_sampling():
    rule = sampled_majority2d(((0, 0), (0, 1), (1, 0)))
    curve = final_density_curve2d(rule, (16, 16), 100, (0.2, 0.8), 5, seed=6)
    values = dict(curve)
    assert values[0.2] < 0.5 < values[0.8]
