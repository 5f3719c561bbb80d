import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from consensuslab.analysis import (MAX_FLIP_SUBSETS, adversarial_flip_search,
                                   build_stg, classify_states,
                                   consensus_time_stats, no_perfect_rule_check,
                                   packed_successors, state_majorities,
                                   stg_to_csv, stg_to_dot, trajectory_outcome)
from consensuslab.rules import (elementary_rule, exact_density_config, gkl_rule,
                                identity_rule, pack_state, radius_rule,
                                random_config, step_sync, unpack_state)
from consensuslab.seeding import rng_for


@given(st.integers(0, 255), st.integers(2, 10))
def test_packed_successors_match_stepping(number, n):
    rule = elementary_rule(number)
    succ = packed_successors(rule, n)
    for state in range(min(1 << n, 64)):
        cells = unpack_state(state, n)
        assert succ[state] == pack_state(step_sync(cells, rule))


def test_state_majorities_marks_ties():
    maj = state_majorities(4)
    assert maj[0b0011] == -1
    assert maj[0b0111] == 1
    assert maj[0b0001] == 0


def test_identity_rule_makes_every_state_a_fixed_point():
    stg = build_stg(identity_rule(), 6)
    assert len(stg.attractors) == 64
    assert all(len(cycle) == 1 for cycle in stg.attractors)


def test_gkl_stg_counts_match_golden(golden):
    for n in (5, 7, 11):
        report = classify_states(build_stg(gkl_rule(), n))
        want = golden["stg"][f"gkl_n{n}"]
        assert (report.correct, report.wrong, report.stuck) == \
            (want["correct"], want["wrong"], want["stuck"])


def test_e232_stuck_count_matches_golden(golden):
    report = classify_states(build_stg(elementary_rule(232), 7))
    assert report.stuck == golden["stg"]["e232_n7"]["stuck"]


def test_three_cell_majority_is_perfect_on_three_cells():
    report = classify_states(build_stg(elementary_rule(232), 3))
    assert report.perfect


def test_gkl_n7_stuck_states_close_under_rotation():
    stg = build_stg(gkl_rule(), 7)
    report = classify_states(stg)
    stuck = set(report.stuck_states)
    for state in list(stuck):
        cells = unpack_state(state, 7)
        for shift in range(7):
            assert pack_state(np.roll(cells, shift)) in stuck


def test_no_perfect_elementary_rule_at_n5():
    failures = no_perfect_rule_check(5)
    assert set(failures) == set(range(256))
    state, verdict = failures[232]
    assert verdict in ("wrong", "stuck")


def test_trajectory_outcomes():
    kind, value = trajectory_outcome([0, 1, 1, 0, 1], gkl_rule(), 50)
    assert (kind, value) == ("uniform", 1)
    # The shift rule cycles 0101... without ever reaching a uniform state.
    kind, value = trajectory_outcome([0, 1, 0, 1], elementary_rule(170), 50)
    assert kind == "cycle" and value == pack_state(np.array([1, 0, 1, 0]))
    kind, value = trajectory_outcome([0, 1, 0, 1, 1], elementary_rule(170), 2)
    assert (kind, value) == ("timeout", None)


def test_consensus_time_stats():
    stats = consensus_time_stats(gkl_rule(), 49, 0.3, 20, 300, seed=4)
    assert stats.failures == 0 and stats.trials == 20
    assert 0 < stats.mean < 300
    assert stats.max == max(stats.times)


def test_flip_attack_matches_golden(golden):
    rule = gkl_rule()
    case = golden["gkl_flip_attacks"]["n25_bernoulli"]
    config = random_config(25, 0.6, rng_for(case["seed"], 0))
    assert int(config.sum()) == case["ones"]
    flips = adversarial_flip_search(rule, config, 2, 500)
    assert list(flips) == case["flips"]
    attacked = config.copy()
    attacked[list(flips)] ^= 1
    assert trajectory_outcome(attacked, rule, 500) != tuple(case["baseline"])


def test_flip_attack_robust_case_matches_golden(golden):
    case = golden["gkl_flip_attacks"]["n49_margin9"]
    config = exact_density_config(49, 0.6, rng_for(case["seed"], 0))
    assert adversarial_flip_search(gkl_rule(), config, 2, 500) is None


def test_flip_attack_subset_budget():
    n = 300
    assert math.comb(n, 3) > MAX_FLIP_SUBSETS
    with pytest.raises(ValueError):
        adversarial_flip_search(gkl_rule(), np.zeros(n, dtype=np.uint8), 3, 10)


def test_stg_csv_and_dot():
    stg = build_stg(gkl_rule(), 5)
    csv_text = stg_to_csv(stg, classify_states(stg))
    lines = csv_text.strip().split("\n")
    assert lines[0] == "state,successor,attractor,verdict"
    assert len(lines) == 33
    dot = stg_to_dot(stg)
    assert dot.startswith("digraph")
    assert "0 -> 0" in dot
