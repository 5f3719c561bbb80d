import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from consensuslab.rules import elementary_rule, evolve, gkl_rule, random_config
from consensuslab.seeding import rng_for
from consensuslab.stochastic import (BlockRule, Schedule, async_final_state,
                                     evolve_async, evolve_async_with_log,
                                     evolve_block_async, evolve_noisy,
                                     final_density_curve, identity_block_rule,
                                     phase_diagram, run_block_async,
                                     sorting_rule)

bit_lists = st.lists(st.integers(0, 1), min_size=2, max_size=40)


def test_zero_noise_equals_deterministic_evolution():
    rule = gkl_rule()
    ic = random_config(60, 0.45, 3)
    noisy = evolve_noisy(ic, rule, 0.0, 40, seed=5)
    clean = evolve(ic, rule, 40)
    for a, b in zip(noisy, clean):
        assert np.array_equal(a, b)


def test_noise_history_is_seed_deterministic():
    rule = gkl_rule()
    ic = random_config(60, 0.45, 3)
    a = evolve_noisy(ic, rule, 0.05, 30, seed=5)
    b = evolve_noisy(ic, rule, 0.05, 30, seed=5)
    c = evolve_noisy(ic, rule, 0.05, 30, seed=6)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert any(not np.array_equal(x, y) for x, y in zip(a, c))


def test_full_noise_inverts_every_cell():
    # q=1 flips each cell after the deterministic step, exactly.
    rule = elementary_rule(204)
    ic = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    history = evolve_noisy(ic, rule, 1.0, 2, seed=0)
    assert np.array_equal(history[1], 1 - ic)
    assert np.array_equal(history[2], ic)


def reference_async(state, rule, choices):
    state = state.copy()
    n = state.size
    for c in choices:
        v = 0
        for o in rule.offsets:
            v = v * 2 + state[(c + o) % n]
        state[c] = rule.table[v]
    return state


def test_async_kernel_matches_reference():
    rule = gkl_rule()
    for t in range(3):
        rng = rng_for(21, t)
        ic = random_config(30, 0.5, rng)
        choices = rng.integers(0, 30, size=2000)
        want = reference_async(ic, rule, choices)
        rng2 = rng_for(21, t)
        ic2 = random_config(30, 0.5, rng2)
        got = async_final_state(ic2, rule, 2000, rng2)
        assert np.array_equal(want, got)


def test_async_history_shape_and_final_state_agree():
    rule = gkl_rule()
    ic = random_config(40, 0.6, 1)
    history = evolve_async(ic, rule, updates_per_row=13, rows=7, seed=rng_for(2, 0))
    assert len(history) == 8
    assert np.array_equal(history[0], ic)
    final = async_final_state(ic, rule, 13 * 7, rng_for(2, 0))
    assert np.array_equal(history[-1], final)


def test_async_log_replays_to_the_same_state():
    rule = gkl_rule()
    ic = random_config(25, 0.5, 4)
    history, log = evolve_async_with_log(ic, rule, 5, 12, seed=9)
    assert len(log) == 60
    assert {row for _, row in log} == set(range(12))
    replayed = reference_async(ic, rule, [cell for cell, _ in log])
    assert np.array_equal(replayed, history[-1])


def test_schedule_validation():
    assert Schedule("sync").updates_per_row == 1
    with pytest.raises(ValueError):
        Schedule("sometimes")
    with pytest.raises(ValueError):
        Schedule("async", updates_per_row=0)


def test_sorting_rule_swaps_inversions_only():
    sort = sorting_rule()
    assert sort.apply(1, 0) == (0, 1)
    assert sort.apply(0, 1) == (0, 1)
    assert sort.apply(1, 1) == (1, 1)
    assert sort.apply(0, 0) == (0, 0)
    ident = identity_block_rule()
    assert all(ident.apply(a, b) == (a, b) for a in (0, 1) for b in (0, 1))


def test_block_rule_validation():
    with pytest.raises(ValueError):
        BlockRule(mapping=((0, 0), (0, 1), (1, 2), (1, 1)), label="bad")


@given(bit_lists)
def test_block_sort_applies_one_update_per_inversion(bits):
    cells = np.array(bits, dtype=np.uint8)
    inversions = sum(int(cells[i] > cells[j])
                     for i in range(cells.size) for j in range(i + 1, cells.size))
    final, applied, terminated = run_block_async(cells, sorting_rule(), seed=0)
    assert terminated
    assert applied == inversions
    assert np.array_equal(final, np.sort(cells))


def test_block_async_history_and_cap():
    ic = np.array([1, 0, 1, 0, 1, 0], dtype=np.uint8)
    history = evolve_block_async(ic, sorting_rule(), rows=10, seed=3)
    assert len(history) == 11
    _, applied, terminated = run_block_async(ic, sorting_rule(), seed=3, max_updates=2)
    assert not terminated and applied == 2


def test_cyclic_sorting_never_settles():
    # On a cycle the pattern 01 keeps an unsorted pair somewhere forever.
    ic = np.array([0, 1], dtype=np.uint8)
    _, applied, terminated = run_block_async(ic, sorting_rule(), seed=0,
                                             max_updates=50, cyclic=True)
    assert not terminated and applied == 50


def test_density_curve_and_phase_diagram_agree_at_zero_noise():
    rule = gkl_rule()
    p_values = (0.3, 0.7)
    curve = final_density_curve(rule, 49, 120, p_values, 6, seed=8)
    assert [p for p, _ in curve] == list(p_values)
    mat = phase_diagram(rule, 49, 120, p_values, (0.0,), 6, seed=8)
    assert mat.shape == (2, 1)
    assert np.allclose(mat[:, 0], [v for _, v in curve])


def test_density_curve_is_sharp_for_gkl_at_small_size():
    curve = dict(final_density_curve(gkl_rule(), 49, 120, (0.25, 0.75), 8, seed=8))
    assert curve[0.25] <= 0.05
    assert curve[0.75] >= 0.95
