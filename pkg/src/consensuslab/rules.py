"""One-dimensional binary cellular automaton rules and synchronous evolution.

Configurations are numpy uint8 arrays of 0s and 1s on a cyclic array: cell
``i`` reads cell ``(i + offset) % n``.  A rule is a sampled-offset lookup
table.  The pattern index convention puts the value read at the first
offset in the most significant bit, so for a numbered rule the table entry
for pattern ``v`` is bit ``v`` of the rule number (all-ones neighborhood ->
top bit).  This is the convention under which rule number 232 is the
three-cell majority rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .seeding import SeedLike, as_rng

MAX_RULE_ARITY = 24


def as_cells(values) -> np.ndarray:
    """Validate and coerce a 1D configuration to a uint8 array."""
    cells = np.asarray(values, dtype=np.uint8)
    if cells.ndim != 1 or cells.size < 1:
        raise ValueError("configuration must be a non-empty 1D sequence")
    if cells.max(initial=0) > 1:
        raise ValueError("cell values must be 0 or 1")
    return cells


@dataclass(frozen=True)
class Rule1D:
    """A 1D rule: ordered sampling offsets plus a 2**k-entry output table."""

    offsets: tuple[int, ...]
    table: np.ndarray = field(compare=False)
    label: str = ""

    def __post_init__(self):
        offsets = tuple(int(o) for o in self.offsets)
        if len(set(offsets)) != len(offsets):
            raise ValueError("offsets must be distinct")
        if not 1 <= len(offsets) <= MAX_RULE_ARITY:
            raise ValueError(f"rule arity must be in [1, {MAX_RULE_ARITY}]")
        table = np.ascontiguousarray(self.table, dtype=np.uint8)
        if table.shape != (1 << len(offsets),):
            raise ValueError("table length must be 2**len(offsets)")
        if table.max(initial=0) > 1:
            raise ValueError("table entries must be 0 or 1")
        table.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "table", table)

    @property
    def arity(self) -> int:
        return len(self.offsets)

    @property
    def rule_number(self) -> int:
        """Table read back as an integer: entry v contributes bit v."""
        return sum(int(b) << v for v, b in enumerate(self.table))

    def __eq__(self, other):
        if not isinstance(other, Rule1D):
            return NotImplemented
        return self.offsets == other.offsets and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.offsets, self.table.tobytes()))


def _table_from_number(number: int, k: int) -> np.ndarray:
    return np.array([(number >> v) & 1 for v in range(1 << k)], dtype=np.uint8)


def elementary_rule(number: int) -> Rule1D:
    """Nearest-neighbor rule for a rule number in [0, 255]."""
    if not 0 <= number <= 255:
        raise ValueError(f"elementary rule number must be in [0, 255], got {number}")
    return Rule1D((-1, 0, 1), _table_from_number(number, 3), label=f"e{number}")


def radius_rule(radius: int, number: int) -> Rule1D:
    """Rule over the contiguous window -radius..radius from its rule number."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    k = 2 * radius + 1
    if k > MAX_RULE_ARITY:
        raise ValueError("radius too large")
    if not 0 <= number < (1 << (1 << k)):
        raise ValueError(f"rule number out of range for radius {radius}")
    offsets = tuple(range(-radius, radius + 1))
    return Rule1D(offsets, _table_from_number(number, k), label=f"r{radius}:{number}")


GKL_OFFSETS = (-3, -1, 0, 1, 3)


def gkl_rule(offsets: tuple[int, int, int, int, int] = GKL_OFFSETS) -> Rule1D:
    """Two-sided polling rule over five sampled cells.

    The five offsets are (far-left, near-left, 0, near-right, far-right).
    A 0 cell polls the two right-hand samples, a 1 cell the two left-hand
    samples; the new value is 1 when poll + own value reaches 2.
    """
    offs = tuple(int(o) for o in offsets)
    if len(offs) != 5 or len(set(offs)) != 5:
        raise ValueError("need 5 distinct offsets")
    if offs[2] != 0:
        raise ValueError("middle offset must be 0 (the cell itself)")
    if not (offs[0] < 0 and offs[1] < 0 and offs[3] > 0 and offs[4] > 0):
        raise ValueError("offsets must be (neg, neg, 0, pos, pos)")
    table = np.zeros(32, dtype=np.uint8)
    for v in range(32):
        l3, l1, c, r1, r3 = (v >> 4) & 1, (v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1
        poll = (r1 + r3) if c == 0 else (l1 + l3)
        table[v] = 1 if poll + c >= 2 else 0
    label = "gkl" if offs == GKL_OFFSETS else "gkl" + repr(offs)
    return Rule1D(offs, table, label=label)


def sampled_majority(offsets) -> Rule1D:
    """Strict majority over an odd number of sampled cells."""
    offs = tuple(int(o) for o in offsets)
    if len(offs) % 2 == 0:
        raise ValueError("sampled majority needs an odd number of offsets")
    if len(set(offs)) != len(offs):
        raise ValueError("offsets must be distinct")
    k = len(offs)
    table = np.array([1 if bin(v).count("1") * 2 > k else 0 for v in range(1 << k)],
                     dtype=np.uint8)
    return Rule1D(offs, table, label=f"maj{offs}")


def identity_rule() -> Rule1D:
    return Rule1D((0,), np.array([0, 1], dtype=np.uint8), label="identity")


def neighborhood_index(cells: np.ndarray, offsets: tuple[int, ...]) -> np.ndarray:
    """Per-cell pattern index (first offset -> most significant bit)."""
    idx = np.zeros(cells.shape[0], dtype=np.uint32)
    for o in offsets:
        idx = (idx << 1) | np.roll(cells, -o)
    return idx


def step_sync(cells: np.ndarray, rule: Rule1D) -> np.ndarray:
    """One synchronous update of every cell; the input is not modified."""
    return rule.table[neighborhood_index(cells, rule.offsets)]


def evolve(cells, rule: Rule1D, steps: int) -> list[np.ndarray]:
    """History of steps+1 configurations, the initial one included."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    current = as_cells(cells)
    history = [current]
    for _ in range(steps):
        current = step_sync(current, rule)
        history.append(current)
    return history


def is_uniform(cells: np.ndarray) -> bool:
    return bool((cells == cells[0]).all())


def run_until_uniform(cells, rule: Rule1D, max_steps: int) -> tuple[np.ndarray, int, bool]:
    """Step until the configuration is uniform, up to max_steps.

    Returns (final configuration, steps taken, whether uniformity was
    reached).  A uniform state is only a stopping point when it is fixed
    under the rule, which holds for any rule quiescent at both extremes.
    """
    current = as_cells(cells)
    for step in range(max_steps + 1):
        if is_uniform(current):
            return current, step, True
        if step == max_steps:
            break
        current = step_sync(current, rule)
    return current, max_steps, False


def density(cells) -> Fraction:
    """Fraction of 1 cells, as an exact rational."""
    cells = as_cells(cells)
    return Fraction(int(cells.sum()), cells.size)


def consensus_state(cells) -> int | None:
    """0 or 1 for a uniform configuration, None otherwise."""
    cells = as_cells(cells)
    if is_uniform(cells):
        return int(cells[0])
    return None


def majority_value(cells) -> int | None:
    """Strict majority cell value, None on an exact tie."""
    cells = as_cells(cells)
    ones = int(cells.sum())
    if 2 * ones == cells.size:
        return None
    return 1 if 2 * ones > cells.size else 0


def random_config(n: int, p: float, seed: SeedLike) -> np.ndarray:
    """Each cell independently 1 with probability p."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = as_rng(seed)
    return (rng.random(n) < p).astype(np.uint8)


def exact_density_config(n: int, p: float, seed: SeedLike) -> np.ndarray:
    """Configuration with exactly round(p*n) ones, uniformly placed.

    This is the initial-condition ensemble used by the density-response
    curves: the realized fraction of 1s never fluctuates across trials, so
    which side of 1/2 a trial starts on is determined by p alone.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = as_rng(seed)
    ones = round(p * n)
    cells = np.zeros(n, dtype=np.uint8)
    cells[:ones] = 1
    return rng.permutation(cells)


def pack_state(cells) -> int:
    """Encode a configuration as an integer, cell 0 in the least significant bit."""
    cells = as_cells(cells)
    out = 0
    for i in range(cells.size - 1, -1, -1):
        out = (out << 1) | int(cells[i])
    return out


def unpack_state(state: int, n: int) -> np.ndarray:
    """Inverse of pack_state for an n-cell configuration."""
    if not 0 <= state < (1 << n):
        raise ValueError("state out of range")
    return np.array([(state >> i) & 1 for i in range(n)], dtype=np.uint8)


def complement_pattern(v: int, k: int) -> int:
    return ~v & ((1 << k) - 1)


def reflect_pattern(v: int, k: int) -> int:
    r = 0
    for _ in range(k):
        r = (r << 1) | (v & 1)
        v >>= 1
    return r


def is_self_complementary(rule: Rule1D) -> bool:
    """table(complement(pattern)) == 1 - table(pattern) for every pattern."""
    k = rule.arity
    t = rule.table
    return all(t[complement_pattern(v, k)] == 1 - t[v] for v in range(1 << k))


def _reflection_is_bit_reversal(offsets: tuple[int, ...]) -> bool:
    # Reversing the pattern bits realizes the spatial reflection exactly when
    # the offset sequence read backwards is its own negation.
    return tuple(reversed(offsets)) == tuple(-o for o in offsets)


def is_reflection_symmetric(rule: Rule1D) -> bool:
    """Output unchanged when the sampled pattern is spatially reversed.

    Only meaningful for a stencil symmetric about 0; returns False otherwise.
    """
    if not _reflection_is_bit_reversal(rule.offsets):
        return False
    k = rule.arity
    t = rule.table
    return all(t[reflect_pattern(v, k)] == t[v] for v in range(1 << k))


def is_complement_reflection_symmetric(rule: Rule1D) -> bool:
    """Invariance under the composition of value swap and spatial reflection.

    This is the symmetry of the two-sided polling rule, which satisfies
    neither the pure value swap nor the pure reflection alone.
    """
    if not _reflection_is_bit_reversal(rule.offsets):
        return False
    k = rule.arity
    t = rule.table
    return all(t[reflect_pattern(complement_pattern(v, k), k)] == 1 - t[v]
               for v in range(1 << k))
