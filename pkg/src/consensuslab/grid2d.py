"""Two-dimensional binary automata on a torus.

Grids are h x w uint8 arrays with both axes cyclic; (dy, dx) offsets point
down and right, so north is (-1, 0).  Three rule families: totalistic
rules over the 5-cell plus or the full 3x3 block, majority over an
arbitrary odd sample of offsets, and the two-sided polling rule on the
plus-shaped neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import SeedLike, as_rng, rng_for

VON_NEUMANN = ((0, 0), (-1, 0), (0, -1), (0, 1), (1, 0))
MOORE = tuple((dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1))

_NEIGHBORHOODS = {"vonneumann5": VON_NEUMANN, "moore9": MOORE}


def as_grid(values) -> np.ndarray:
    grid = np.asarray(values, dtype=np.uint8)
    if grid.ndim != 2 or grid.size < 1:
        raise ValueError("grid must be a non-empty 2D array")
    if grid.max(initial=0) > 1:
        raise ValueError("cell values must be 0 or 1")
    return grid


@dataclass(frozen=True)
class Totalistic2D:
    """Output depends only on the neighborhood total: bit t of code."""

    neighborhood: str
    code: int

    def __post_init__(self):
        if self.neighborhood not in _NEIGHBORHOODS:
            raise ValueError(f"unknown neighborhood {self.neighborhood!r}")
        size = len(_NEIGHBORHOODS[self.neighborhood])
        if not 0 <= self.code < (1 << (size + 1)):
            raise ValueError(f"code must be < 2^{size + 1} for {self.neighborhood}")

    @property
    def offsets(self) -> tuple[tuple[int, int], ...]:
        return _NEIGHBORHOODS[self.neighborhood]

    @property
    def output_per_total(self) -> np.ndarray:
        size = len(self.offsets)
        return np.array([(self.code >> t) & 1 for t in range(size + 1)], dtype=np.uint8)


@dataclass(frozen=True)
class SampledMajority2D:
    """Majority value over an odd number of sampled offsets."""

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        offsets = tuple((int(dy), int(dx)) for dy, dx in self.offsets)
        if len(offsets) % 2 == 0:
            raise ValueError("need an odd number of offsets")
        if len(set(offsets)) != len(offsets):
            raise ValueError("offsets must be distinct")
        object.__setattr__(self, "offsets", offsets)


@dataclass(frozen=True)
class GKL2D:
    """Plus-neighborhood polling: a 0 cell polls east+south, a 1 cell
    north+west; new value is 1 when poll + own value reaches 2."""


Rule2D = Totalistic2D | SampledMajority2D | GKL2D


def totalistic2d(neighborhood: str, code: int) -> Totalistic2D:
    return Totalistic2D(neighborhood, code)


def sampled_majority2d(offsets) -> SampledMajority2D:
    return SampledMajority2D(tuple(tuple(o) for o in offsets))


def gkl2d() -> GKL2D:
    return GKL2D()


def majority_code(neighborhood: str) -> int:
    """Totalistic code of the strict-majority rule on a full neighborhood."""
    size = len(_NEIGHBORHOODS[neighborhood])
    return sum(1 << t for t in range(size + 1) if 2 * t > size)


def _at(grid: np.ndarray, dy: int, dx: int) -> np.ndarray:
    # value of the neighbor at (dy, dx), for every cell at once
    return np.roll(grid, (-dy, -dx), axis=(0, 1))


def step2d(grid, rule: Rule2D) -> np.ndarray:
    """One simultaneous update with toroidal indexing."""
    grid = as_grid(grid)
    if isinstance(rule, Totalistic2D):
        total = np.zeros(grid.shape, dtype=np.int64)
        for dy, dx in rule.offsets:
            total += _at(grid, dy, dx)
        return rule.output_per_total[total]
    if isinstance(rule, SampledMajority2D):
        total = np.zeros(grid.shape, dtype=np.int64)
        for dy, dx in rule.offsets:
            total += _at(grid, dy, dx)
        return (2 * total > len(rule.offsets)).astype(np.uint8)
    if isinstance(rule, GKL2D):
        north = _at(grid, -1, 0)
        west = _at(grid, 0, -1)
        east = _at(grid, 0, 1)
        south = _at(grid, 1, 0)
        poll = np.where(grid == 0, east + south, north + west)
        return ((poll + grid) >= 2).astype(np.uint8)
    raise TypeError(f"not a 2D rule: {rule!r}")


def evolve2d(grid, rule: Rule2D, steps: int) -> list[np.ndarray]:
    """History of steps+1 grids, the initial one included."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    current = as_grid(grid)
    history = [current]
    for _ in range(steps):
        current = step2d(current, rule)
        history.append(current)
    return history


def settle2d(grid, rule: Rule2D, max_steps: int) -> tuple[np.ndarray, int, str]:
    """Step until the evolution becomes a fixed point or a 2-cycle.

    Returns (final grid, steps taken, kind) with kind one of "fixed",
    "period2", or "running" when max_steps elapsed first.
    """
    previous = None
    current = as_grid(grid)
    for step in range(max_steps):
        nxt = step2d(current, rule)
        if np.array_equal(nxt, current):
            return current, step, "fixed"
        if previous is not None and np.array_equal(nxt, previous):
            return nxt, step + 1, "period2"
        previous, current = current, nxt
    return current, max_steps, "running"


def is_uniform2d(grid) -> bool:
    grid = as_grid(grid)
    return bool((grid == grid.flat[0]).all())


def spacetime_slice(history, row: int) -> np.ndarray:
    """Row `row` of every grid in the history, stacked oldest first."""
    grids = [as_grid(g) for g in history]
    if not grids:
        raise ValueError("history must be non-empty")
    if not 0 <= row < grids[0].shape[0]:
        raise ValueError(f"row {row} outside grid of height {grids[0].shape[0]}")
    return np.stack([g[row] for g in grids])


def random_grid(h: int, w: int, p: float, seed: SeedLike) -> np.ndarray:
    """Each cell independently 1 with probability p."""
    if h < 1 or w < 1:
        raise ValueError("grid dimensions must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = as_rng(seed)
    return (rng.random((h, w)) < p).astype(np.uint8)


def exact_density_grid(h: int, w: int, p: float, seed: SeedLike) -> np.ndarray:
    """Grid with exactly round(p*h*w) ones, uniformly placed."""
    if h < 1 or w < 1:
        raise ValueError("grid dimensions must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = as_rng(seed)
    flat = np.zeros(h * w, dtype=np.uint8)
    flat[:round(p * h * w)] = 1
    return rng.permutation(flat).reshape(h, w)


def quiescent_extremes2d(rule: Rule2D) -> bool:
    """Whether both uniform grids are fixed points of the rule."""
    zeros = np.zeros((4, 4), dtype=np.uint8)
    ones = np.ones((4, 4), dtype=np.uint8)
    return (np.array_equal(step2d(zeros, rule), zeros)
            and np.array_equal(step2d(ones, rule), ones))


def final_density_curve2d(rule: Rule2D, size: tuple[int, int], steps: int,
                          p_values, trials: int, seed: int) -> list[tuple[float, float]]:
    """Mean final density after `steps` steps, per initial density p.

    Trials start from exact-density grids; runs of a rule that fixes both
    uniform grids stop early once uniform.
    """
    h, w = size
    quiescent = quiescent_extremes2d(rule)
    out = []
    for i, p in enumerate(p_values):
        total = 0.0
        for t in range(trials):
            current = exact_density_grid(h, w, p, rng_for(seed, i, t))
            for _ in range(steps):
                if quiescent and is_uniform2d(current):
                    break
                current = step2d(current, rule)
            total += current.mean()
        out.append((float(p), total / trials))
    return out
