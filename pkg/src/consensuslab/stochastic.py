"""Noisy and asynchronous evolution, density-response curves, block updates.

Every operation takes a seed and is bitwise deterministic given it.  Trial
ensembles derive one independent stream per trial with the spawn-key scheme
in seeding.py, and each trial draws its initial configuration from its
stream before consuming any regime-specific randomness, so trials with the
same (seed, index) start identically under every regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .rules import Rule1D, as_cells, exact_density_config, step_sync
from .seeding import SeedLike, as_rng, rng_for


def evolve_noisy(config, rule: Rule1D, q: float, steps: int, seed: SeedLike) -> list[np.ndarray]:
    """Rule step then independent per-cell flips with probability q, per step.

    The per-step flip uniforms are drawn even when q is 0, so runs that
    differ only in q share flip coordinates: the flips at a smaller q are a
    subset of those at a larger q (monotone coupling), and q=0 reproduces
    the deterministic evolution exactly.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must be in [0, 1]")
    rng = as_rng(seed)
    current = as_cells(config)
    history = [current]
    for _ in range(steps):
        current = step_sync(current, rule)
        flips = rng.random(current.size) < q
        current = current ^ flips.astype(np.uint8)
        history.append(current)
    return history


def _quiescent_extremes(rule: Rule1D) -> bool:
    return rule.table[0] == 0 and rule.table[-1] == 1


def final_density_curve(rule: Rule1D, n: int, steps: int, p_values, trials: int,
                        seed: int, q: float = 0.0) -> list[tuple[float, float]]:
    """Mean final density after `steps` steps, per initial density p.

    Each trial starts from a configuration with exactly round(p*n) ones.
    At q=0 a run stops early once uniform, provided the rule fixes both
    uniform states.
    """
    quiescent = _quiescent_extremes(rule)
    out = []
    for i, p in enumerate(p_values):
        total = 0.0
        for t in range(trials):
            rng = rng_for(seed, i, t)
            current = exact_density_config(n, p, rng)
            for _ in range(steps):
                if q == 0.0 and quiescent and (current == current[0]).all():
                    break
                current = step_sync(current, rule)
                if q > 0.0:
                    flips = rng.random(n) < q
                    current = current ^ flips.astype(np.uint8)
            total += current.mean()
        out.append((float(p), total / trials))
    return out


def phase_diagram(rule: Rule1D, n: int, steps: int, p_grid, q_grid, trials: int,
                  seed: int) -> np.ndarray:
    """Matrix of mean final density, rows indexed by p, columns by q."""
    diagram = np.zeros((len(p_grid), len(q_grid)))
    for i, p in enumerate(p_grid):
        for j, q in enumerate(q_grid):
            total = 0.0
            for t in range(trials):
                rng = rng_for(seed, i, j, t)
                ic = exact_density_config(n, p, rng)
                total += evolve_noisy(ic, rule, q, steps, rng)[-1].mean()
            diagram[i, j] = total / trials
    return diagram


@njit(cache=True)
def _apply_async_updates(state, choices, table, offsets, snapshot_every, out):
    # state is updated in place; a snapshot lands in `out` after every
    # snapshot_every single-cell updates.
    n = state.shape[0]
    k = offsets.shape[0]
    row = 0
    for j in range(choices.shape[0]):
        c = choices[j]
        idx = 0
        for m in range(k):
            idx = idx * 2 + state[(c + offsets[m]) % n]
        state[c] = table[idx]
        if (j + 1) % snapshot_every == 0:
            out[row] = state
            row += 1


def _async_run(ic: np.ndarray, rule: Rule1D, choices: np.ndarray,
               snapshot_every: int, snapshots: int) -> tuple[np.ndarray, np.ndarray]:
    state = ic.copy()
    out = np.empty((snapshots, ic.size), dtype=np.uint8)
    _apply_async_updates(state, choices,
                         rule.table, np.asarray(rule.offsets, dtype=np.int64),
                         snapshot_every, out)
    return state, out


def evolve_async(config, rule: Rule1D, updates_per_row: int, rows: int,
                 seed: SeedLike) -> list[np.ndarray]:
    """Random-sequential updating: one uniformly chosen cell recomputed at a
    time, immediately in place; one configuration rendered per
    updates_per_row updates, the initial one first."""
    if updates_per_row < 1:
        raise ValueError("updates_per_row must be >= 1")
    ic = as_cells(config)
    rng = as_rng(seed)
    choices = rng.integers(0, ic.size, size=rows * updates_per_row, dtype=np.int64)
    _, out = _async_run(ic, rule, choices, updates_per_row, rows)
    return [ic] + [out[r] for r in range(rows)]


def evolve_async_with_log(config, rule: Rule1D, updates_per_row: int, rows: int,
                          seed: SeedLike) -> tuple[list[np.ndarray], list[tuple[int, int]]]:
    """evolve_async plus the update log as (cell, row) pairs in order."""
    if updates_per_row < 1:
        raise ValueError("updates_per_row must be >= 1")
    ic = as_cells(config)
    rng = as_rng(seed)
    choices = rng.integers(0, ic.size, size=rows * updates_per_row, dtype=np.int64)
    _, out = _async_run(ic, rule, choices, updates_per_row, rows)
    log = [(int(c), j // updates_per_row) for j, c in enumerate(choices)]
    return [ic] + [out[r] for r in range(rows)], log


def async_final_state(config, rule: Rule1D, updates: int, seed: SeedLike) -> np.ndarray:
    """Configuration after `updates` random single-cell updates."""
    ic = as_cells(config)
    rng = as_rng(seed)
    choices = rng.integers(0, ic.size, size=updates, dtype=np.int64)
    state, _ = _async_run(ic, rule, choices, updates + 1, 0)
    return state


def async_final_density_curve(rule: Rule1D, n: int, rows: int, updates_per_row: int,
                              p_values, trials: int, seed: int) -> list[tuple[float, float]]:
    """Mean final density under random-sequential updating, per initial p."""
    out = []
    for i, p in enumerate(p_values):
        total = 0.0
        for t in range(trials):
            rng = rng_for(seed, i, t)
            ic = exact_density_config(n, p, rng)
            total += async_final_state(ic, rule, rows * updates_per_row, rng).mean()
        out.append((float(p), total / trials))
    return out


@dataclass(frozen=True)
class Schedule:
    """Update schedule: all cells at once, or random single cells."""

    kind: str = "sync"
    updates_per_row: int = 1

    def __post_init__(self):
        if self.kind not in ("sync", "async"):
            raise ValueError("schedule kind must be 'sync' or 'async'")
        if self.updates_per_row < 1:
            raise ValueError("updates_per_row must be >= 1")


@dataclass(frozen=True)
class BlockRule:
    """Total map from ordered adjacent-cell pairs to replacement pairs."""

    mapping: tuple[tuple[int, int], tuple[int, int], tuple[int, int], tuple[int, int]]
    label: str = ""

    def __post_init__(self):
        if len(self.mapping) != 4:
            raise ValueError("a block rule maps all 4 pair patterns")
        for pair in self.mapping:
            if len(pair) != 2 or any(v not in (0, 1) for v in pair):
                raise ValueError("pair outputs must be bits")

    def apply(self, a: int, b: int) -> tuple[int, int]:
        return self.mapping[2 * a + b]


def sorting_rule() -> BlockRule:
    """Swap each out-of-order (1,0) pair; fix everything else."""
    return BlockRule(((0, 0), (0, 1), (0, 1), (1, 1)), label="sort")


def identity_block_rule() -> BlockRule:
    return BlockRule(((0, 0), (0, 1), (1, 0), (1, 1)), label="identity")


def _pair_positions(n: int, cyclic: bool) -> int:
    if n < 2:
        raise ValueError("block updates need n >= 2")
    return n if cyclic else n - 1


def evolve_block_async(config, block_rule: BlockRule, rows: int, seed: SeedLike,
                       cyclic: bool = False) -> list[np.ndarray]:
    """One block update at a uniformly random adjacent pair per row.

    Pairs are (i, i+1) for i < n-1 on a line (the default) and wrap around
    when cyclic.
    """
    current = as_cells(config).copy()
    n = current.size
    positions = _pair_positions(n, cyclic)
    rng = as_rng(seed)
    history = [current.copy()]
    for i in rng.integers(0, positions, size=rows):
        j = (i + 1) % n
        current[i], current[j] = block_rule.apply(current[i], current[j])
        history.append(current.copy())
    return history


def run_block_async(config, block_rule: BlockRule, seed: SeedLike,
                    max_updates: int | None = None,
                    cyclic: bool = False) -> tuple[np.ndarray, int, bool]:
    """Apply effective block updates until none remains.

    At each step one position is chosen uniformly among those whose pair
    the rule would change; choosing only among effective positions visits
    the same chain of states as uniform choice over all positions with
    no-ops skipped.  Returns (final, updates applied, whether a fixed
    point was reached within the cap, default 50*n^2).
    """
    current = as_cells(config).copy()
    n = current.size
    positions = _pair_positions(n, cyclic)
    if max_updates is None:
        max_updates = 50 * n * n
    rng = as_rng(seed)

    def effective(i: int) -> bool:
        j = (i + 1) % n
        return block_rule.apply(int(current[i]), int(current[j])) != (int(current[i]), int(current[j]))

    active = [i for i in range(positions) if effective(i)]
    index_of = {i: k for k, i in enumerate(active)}

    def refresh(i: int) -> None:
        if not 0 <= i < positions:
            return
        now = effective(i)
        if now and i not in index_of:
            index_of[i] = len(active)
            active.append(i)
        elif not now and i in index_of:
            k = index_of.pop(i)
            last = active.pop()
            if last != i:
                active[k] = last
                index_of[last] = k

    applied = 0
    while active and applied < max_updates:
        i = active[int(rng.integers(0, len(active)))]
        j = (i + 1) % n
        current[i], current[j] = block_rule.apply(int(current[i]), int(current[j]))
        applied += 1
        for neighbor in (i - 1, i, i + 1):
            refresh(neighbor % n if cyclic else neighbor)
    return current, applied, not active
