"""Exact finite-size analysis of 1D rules on small cyclic arrays.

A configuration of n cells is packed into an n-bit integer with cell 0 in
the least significant bit, so the full state space is 0..2^n-1 and one
synchronous step is a function on that range.  Everything here is exact
enumeration: transition graphs, attractors, per-state verdicts, searches
over all elementary rules, and exhaustive initial-flip attacks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .rules import (
    Rule1D,
    as_cells,
    consensus_state,
    density,
    exact_density_config,
    is_uniform,
    pack_state,
    step_sync,
)
from .seeding import SeedLike, rng_for

MAX_STG_CELLS = 24
REPORT_STATE_CAP = 64

VERDICT_CORRECT = 0
VERDICT_WRONG = 1
VERDICT_STUCK = 2
VERDICT_TIE = 3
VERDICT_NAMES = ("correct", "wrong", "stuck", "tie-excluded")


def packed_successors(rule: Rule1D, n: int) -> np.ndarray:
    """Successor of every packed state under one synchronous step.

    Vectorized over the whole 2^n state space: for each cell the pattern
    index is assembled from the packed bits, then the table is applied and
    the output bit folded back in.
    """
    if not 1 <= n <= MAX_STG_CELLS:
        raise ValueError(f"state space limited to n <= {MAX_STG_CELLS}, got {n}")
    states = np.arange(1 << n, dtype=np.int64)
    succ = np.zeros(1 << n, dtype=np.int64)
    table = rule.table.astype(np.int64)
    for i in range(n):
        idx = np.zeros(1 << n, dtype=np.int64)
        for o in rule.offsets:
            idx = (idx << 1) | ((states >> ((i + o) % n)) & 1)
        succ |= table[idx] << i
    return succ


def state_majorities(n: int) -> np.ndarray:
    """Majority value per packed state: 0, 1, or -1 for an exact tie."""
    pops = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)
    out = np.where(2 * pops > n, 1, 0).astype(np.int8)
    out[2 * pops == n] = -1
    return out


@dataclass(frozen=True)
class TransitionGraph:
    """Functional graph of one synchronous step on all 2^n states."""

    n: int
    successor: np.ndarray = field(compare=False)
    attractor_id: np.ndarray = field(compare=False)
    attractors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.successor.shape != (1 << self.n,):
            raise ValueError("successor array must cover all 2^n states")

    @property
    def num_states(self) -> int:
        return 1 << self.n


def _find_attractors(succ: np.ndarray) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    # Pointer doubling: after ceil(log2(S)) squarings f[s] lies on the
    # terminal cycle of s, and the image of f is exactly the cycle states.
    size = succ.shape[0]
    f = succ.copy()
    hops = 1
    while hops < size:
        f = f[f]
        hops <<= 1
    cycle_states = np.unique(f)

    cycle_of: dict[int, int] = {}
    attractors: list[tuple[int, ...]] = []
    for start in map(int, cycle_states):
        if start in cycle_of:
            continue
        cycle = [start]
        s = int(succ[start])
        while s != start:
            cycle.append(s)
            s = int(succ[s])
        low = cycle.index(min(cycle))
        cycle = cycle[low:] + cycle[:low]
        aid = len(attractors)
        attractors.append(tuple(cycle))
        for c in cycle:
            cycle_of[c] = aid

    ids = np.empty(size, dtype=np.int64)
    lookup = np.zeros(size, dtype=np.int64)
    for c, aid in cycle_of.items():
        lookup[c] = aid
    ids[:] = lookup[f]
    return ids, tuple(attractors)


def build_stg(rule: Rule1D, n: int) -> TransitionGraph:
    """Exact transition graph of `rule` on the cyclic n-cell array."""
    succ = packed_successors(rule, n)
    ids, attractors = _find_attractors(succ)
    return TransitionGraph(n=n, successor=succ, attractor_id=ids, attractors=attractors)


def transition_graph_from_successors(succ) -> TransitionGraph:
    """Wrap an externally computed successor map (size must be a power of 2)."""
    succ = np.asarray(succ, dtype=np.int64)
    n = int(succ.shape[0]).bit_length() - 1
    if succ.shape[0] != (1 << n):
        raise ValueError("successor array length must be a power of two")
    ids, attractors = _find_attractors(succ)
    return TransitionGraph(n=n, successor=succ, attractor_id=ids, attractors=attractors)


@dataclass(frozen=True)
class ClassificationReport:
    """Per-state consensus verdicts for a transition graph."""

    n: int
    verdicts: np.ndarray = field(compare=False)
    correct: int
    wrong: int
    stuck: int
    tie_excluded: int
    wrong_states: tuple[int, ...]
    stuck_states: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.correct + self.wrong + self.stuck + self.tie_excluded

    @property
    def perfect(self) -> bool:
        return self.wrong == 0 and self.stuck == 0


def classify_states(stg: TransitionGraph) -> ClassificationReport:
    """Verdict per state: does it reach the uniform state of its majority?

    correct / wrong require the attractor to be exactly the matching /
    opposite uniform fixed point; any other attractor (including cycles
    through uniform states) counts as stuck.  Exact ties (even n only) are
    excluded rather than judged.
    """
    n = stg.n
    maj = state_majorities(n)
    all0 = 0
    all1 = (1 << n) - 1

    target = np.full(stg.num_states, -1, dtype=np.int64)
    uniform_fixed = {}
    for aid, cyc in enumerate(stg.attractors):
        if cyc == (all0,):
            uniform_fixed[aid] = 0
        elif cyc == (all1,):
            uniform_fixed[aid] = 1
    for aid, v in uniform_fixed.items():
        target[stg.attractor_id == aid] = v

    verdicts = np.empty(stg.num_states, dtype=np.int8)
    verdicts[:] = VERDICT_STUCK
    verdicts[target == maj] = VERDICT_CORRECT
    reaches_uniform = target >= 0
    verdicts[reaches_uniform & (target != maj)] = VERDICT_WRONG
    verdicts[maj == -1] = VERDICT_TIE

    wrong_states = np.flatnonzero(verdicts == VERDICT_WRONG)
    stuck_states = np.flatnonzero(verdicts == VERDICT_STUCK)
    return ClassificationReport(
        n=n,
        verdicts=verdicts,
        correct=int((verdicts == VERDICT_CORRECT).sum()),
        wrong=int(wrong_states.size),
        stuck=int(stuck_states.size),
        tie_excluded=int((verdicts == VERDICT_TIE).sum()),
        wrong_states=tuple(map(int, wrong_states[:REPORT_STATE_CAP])),
        stuck_states=tuple(map(int, stuck_states[:REPORT_STATE_CAP])),
    )


def no_perfect_rule_check(n: int) -> dict[int, tuple[int, str]]:
    """First failing state for every elementary rule on n cells.

    Returns {rule number: (state, verdict name)} where the state is the
    smallest non-tie state not classified correctly.  A rule missing from
    the result would be a perfect classifier; on odd n <= 9 the result
    always has all 256 entries.
    """
    if n % 2 == 0:
        raise ValueError("use odd n so strict majority is always defined")
    if n > 9:
        raise ValueError("exhaustive elementary-rule check limited to n <= 9")
    from .rules import elementary_rule

    failures: dict[int, tuple[int, str]] = {}
    for number in range(256):
        report = classify_states(build_stg(elementary_rule(number), n))
        bad = np.flatnonzero(
            (report.verdicts == VERDICT_WRONG) | (report.verdicts == VERDICT_STUCK)
        )
        if bad.size:
            state = int(bad[0])
            failures[number] = (state, VERDICT_NAMES[report.verdicts[state]])
    return failures


def trajectory_outcome(cells, rule: Rule1D, max_steps: int) -> tuple[str, int | None]:
    """Terminal classification of one deterministic run.

    Returns ("uniform", value) at the first uniform configuration,
    ("cycle", smallest packed state on the cycle) when a state repeats
    without ever being uniform, or ("timeout", None) after max_steps.
    """
    current = as_cells(cells)
    seen: dict[int, int] = {}
    trail: list[int] = []
    for _ in range(max_steps + 1):
        if is_uniform(current):
            return "uniform", int(current[0])
        packed = pack_state(current)
        if packed in seen:
            return "cycle", min(trail[seen[packed]:])
        seen[packed] = len(trail)
        trail.append(packed)
        current = step_sync(current, rule)
    return "timeout", None


@dataclass(frozen=True)
class ConsensusTimeStats:
    """Summary of time-to-first-uniform over seeded trials."""

    mean: float
    median: float
    max: int
    failures: int
    trials: int
    times: tuple[int, ...]


def consensus_time_stats(rule: Rule1D, n: int, p: float, trials: int,
                         max_steps: int, seed: SeedLike) -> ConsensusTimeStats:
    """Time to the first uniform state over trials from density-p starts.

    Initial conditions carry exactly round(p*n) ones.  A trial fails when a
    configuration repeats (stuck on a cycle) or max_steps elapses before
    any uniform state appears.
    """
    times: list[int] = []
    failures = 0
    for t in range(trials):
        current = exact_density_config(n, p, rng_for(_seed_int(seed), t))
        seen: set[int] = set()
        for step in range(max_steps + 1):
            if is_uniform(current):
                times.append(step)
                break
            packed = pack_state(current)
            if packed in seen or step == max_steps:
                failures += 1
                break
            seen.add(packed)
            current = step_sync(current, rule)
    arr = np.array(times, dtype=np.int64)
    return ConsensusTimeStats(
        mean=float(arr.mean()) if times else float("nan"),
        median=float(np.median(arr)) if times else float("nan"),
        max=int(arr.max()) if times else 0,
        failures=failures,
        trials=trials,
        times=tuple(times),
    )


def _seed_int(seed: SeedLike) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    raise TypeError("trial-splitting operations need an integer master seed")


MAX_FLIP_SUBSETS = 2_000_000


def adversarial_flip_search(rule: Rule1D, config, max_flips: int,
                            max_steps: int) -> tuple[int, ...] | None:
    """Smallest set of initial cells whose flip changes the run's outcome.

    Subsets are tried in ascending size, lexicographically within a size,
    and the first subset whose trajectory_outcome differs from the
    unmodified run's is returned; None when no subset within max_flips
    changes anything.
    """
    if max_flips < 1 or max_flips > 3:
        raise ValueError("flip budget must be 1..3 (exhaustive search)")
    base = as_cells(config).copy()
    n = base.size
    total = sum(math.comb(n, s) for s in range(1, max_flips + 1))
    if total > MAX_FLIP_SUBSETS:
        raise ValueError(f"{total} candidate subsets exceed cap {MAX_FLIP_SUBSETS}")
    baseline = trajectory_outcome(base, rule, max_steps)
    for size in range(1, max_flips + 1):
        for subset in itertools.combinations(range(n), size):
            trial = base.copy()
            for i in subset:
                trial[i] ^= 1
            if trajectory_outcome(trial, rule, max_steps) != baseline:
                return subset
    return None


def stg_to_csv(stg: TransitionGraph, report: ClassificationReport | None = None) -> str:
    """CSV rows `state,successor,attractor,verdict` for every state."""
    if report is None:
        report = classify_states(stg)
    lines = ["state,successor,attractor,verdict"]
    for s in range(stg.num_states):
        lines.append(f"{s},{int(stg.successor[s])},{int(stg.attractor_id[s])},"
                     f"{VERDICT_NAMES[report.verdicts[s]]}")
    return "\n".join(lines) + "\n"


_MAJORITY_FILL = {1: "gray75", 0: "white", -1: "khaki"}


def stg_to_dot(stg: TransitionGraph) -> str:
    """DOT digraph of the transition map, nodes shaded by majority value."""
    maj = state_majorities(stg.n)
    lines = ["digraph stg {", "  node [shape=circle style=filled];"]
    for s in range(stg.num_states):
        lines.append(f'  {s} [fillcolor="{_MAJORITY_FILL[int(maj[s])]}"];')
    for s in range(stg.num_states):
        lines.append(f"  {s} -> {int(stg.successor[s])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
