"""Rule-space search for density-classification performance.

Candidates are rule numbers (radius-2 by default) scored over seeded
trials.  A score keeps two integer accumulators (trials ending in the
exact correct uniform state, and final cells agreeing with the initial
majority), so partial scores over disjoint trial ranges merge exactly.
Trial t of a spec is always the same experiment: its initial density is
p_values[t mod len(p_values)] and its random stream is derived from
(seed, t) alone, independent of how trials are batched across workers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from .rules import (
    Rule1D,
    complement_pattern,
    exact_density_config,
    is_uniform,
    radius_rule,
    reflect_pattern,
    step_sync,
)
import numpy as np

from .seeding import rng_for
from .stochastic import async_final_state

EXHAUSTIVE_GATE = 2_000_000


@dataclass(frozen=True)
class ScoreSpec:
    """Everything that defines one scoring experiment."""

    regime: str = "sync"
    n: int = 99
    steps: int = 300
    updates_per_row: int = 0
    q: float = 0.0
    p_values: tuple[float, ...] = (0.3, 0.35, 0.4, 0.45, 0.55, 0.6, 0.65, 0.7)
    trials: int = 40
    seed: int = 0
    metric: str = "exact"

    def __post_init__(self):
        if self.regime not in ("sync", "async", "noisy"):
            raise ValueError("regime must be sync, async, or noisy")
        if self.metric not in ("exact", "agree"):
            raise ValueError("metric must be exact or agree")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.p_values:
            raise ValueError("need at least one initial density")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("densities must be in [0, 1]")
        # round(p*n) ones per trial: an exact half-split has no majority
        # for the metrics to compare against.
        if any(2 * round(p * self.n) == self.n for p in self.p_values):
            raise ValueError("a density tying at this n leaves no majority")
        if any(2 * round(p * self.n) == self.n for p in self.p_values):
            raise ValueError("a density giving an exact tie cannot be scored")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must be in [0, 1]")
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))

    @property
    def rows_updates(self) -> int:
        """Single-cell updates per rendered row in the async regime."""
        return self.updates_per_row if self.updates_per_row else 2 * self.n

    @property
    def spec_hash(self) -> str:
        payload = json.dumps([self.regime, self.n, self.steps, self.rows_updates,
                              self.q, self.p_values, self.trials, self.seed],
                             separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class SearchResult:
    """Score of one rule; accumulators are integers so merges are exact."""

    rule_number: int
    exact_hits: int
    agree_cells: int
    trials: int
    spec: ScoreSpec

    @property
    def metric_exact(self) -> float:
        return self.exact_hits / self.trials

    @property
    def metric_agree(self) -> float:
        return self.agree_cells / (self.trials * self.spec.n)

    @property
    def primary_metric(self) -> float:
        return self.metric_exact if self.spec.metric == "exact" else self.metric_agree


def default_rule_factory(number: int) -> Rule1D:
    return radius_rule(2, number)


def _final_state(rule: Rule1D, spec: ScoreSpec, ic, rng):
    if spec.regime == "sync":
        quiescent = rule.table[0] == 0 and rule.table[-1] == 1
        current = ic
        for _ in range(spec.steps):
            if quiescent and (current == current[0]).all():
                break
            current = step_sync(current, rule)
        return current
    if spec.regime == "async":
        return async_final_state(ic, rule, spec.steps * spec.rows_updates, rng)
    current = ic
    for _ in range(spec.steps):
        current = step_sync(current, rule)
        flips = rng.random(spec.n) < spec.q
        current = current ^ flips.astype(current.dtype)
    return current


def score_rule(rule: Rule1D | int, spec: ScoreSpec,
               trial_range: range | None = None) -> SearchResult:
    """Score one rule over a range of the spec's trials (all by default)."""
    if isinstance(rule, int):
        rule = default_rule_factory(rule)
    trials = trial_range if trial_range is not None else range(spec.trials)
    exact_hits = 0
    agree_cells = 0
    for t in trials:
        p = spec.p_values[t % len(spec.p_values)]
        rng = rng_for(spec.seed, t)
        ic = exact_density_config(spec.n, p, rng)
        majority = 1 if 2 * int(ic.sum()) > spec.n else 0
        final = _final_state(rule, spec, ic, rng)
        agree = int((final == majority).sum())
        agree_cells += agree
        if agree == spec.n:
            exact_hits += 1
    return SearchResult(rule_number=rule.rule_number, exact_hits=exact_hits,
                        agree_cells=agree_cells, trials=len(trials), spec=spec)


def merge_scores(a: SearchResult, b: SearchResult) -> SearchResult:
    """Combine scores of the same rule over disjoint trial ranges."""
    if a.rule_number != b.rule_number or a.spec != b.spec:
        raise ValueError("can only merge scores of the same rule and spec")
    return replace(a, exact_hits=a.exact_hits + b.exact_hits,
                   agree_cells=a.agree_cells + b.agree_cells,
                   trials=a.trials + b.trials)


def sample_rule_numbers(count: int, seed: int, bits: int = 32) -> list[int]:
    """Uniform seeded sample of `count` rule numbers below 2**bits."""
    rng = rng_for(seed, 0)
    return [int(x) for x in rng.integers(0, 1 << bits, size=count, dtype=np.uint64)]


def filter_symmetric(candidates: Iterable[int], arity: int = 5) -> list[int]:
    """Keep rule numbers both self-complementary and reflection symmetric.

    Opt-in pruning only: plenty of good classifiers (the two-sided polling
    rule among them) fail plain self-complementarity, so this is never
    applied by default.
    """
    size = 1 << arity
    comp = [complement_pattern(v, arity) for v in range(size)]
    refl = [reflect_pattern(v, arity) for v in range(size)]
    kept = []
    for number in candidates:
        bits = [(number >> v) & 1 for v in range(size)]
        if all(bits[comp[v]] == 1 - bits[v] for v in range(size)) and \
                all(bits[refl[v]] == bits[v] for v in range(size)):
            kept.append(number)
    return kept


def results_csv(results: Sequence[SearchResult]) -> str:
    """CSV with header rule,metric_exact,metric_agree,trials,spec_hash."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["rule", "metric_exact", "metric_agree", "trials", "spec_hash"])
    for r in results:
        writer.writerow([r.rule_number, repr(r.metric_exact), repr(r.metric_agree),
                         r.trials, r.spec.spec_hash])
    return buf.getvalue()


def _score_payload(args: tuple[int, ScoreSpec]) -> tuple[int, int, int, int]:
    number, spec = args
    r = score_rule(number, spec)
    return (number, r.exact_hits, r.agree_cells, r.trials)


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def search_rules(candidates: Sequence[int], spec: ScoreSpec, top_k: int,
                 rule_factory: Callable[[int], Rule1D] = default_rule_factory,
                 checkpoint_path: str | None = None,
                 checkpoint_every: int = 10_000,
                 workers: int = 1,
                 allow_exhaustive: bool = False) -> list[SearchResult]:
    """Score every candidate and return the top_k by the spec's metric.

    Ranking ties break by ascending rule number.  With a checkpoint path,
    results land in a CSV (plus a companion .ckpt.json with the index of
    the last scored candidate) every checkpoint_every candidates, written
    atomically, and a matching checkpoint is resumed instead of rescored.
    Workers > 1 partitions candidates across processes; the merged result
    is identical to the sequential one.
    """
    candidates = list(candidates)
    if len(candidates) > EXHAUSTIVE_GATE and not allow_exhaustive:
        probe_start = time.perf_counter()
        for number in candidates[:3]:
            score_rule(rule_factory(number), spec)
        rate = 3 / max(time.perf_counter() - probe_start, 1e-9)
        est_h = len(candidates) / max(rate, 1e-9) / 3600
        raise ValueError(
            f"{len(candidates)} candidates exceeds the gate ({EXHAUSTIVE_GATE}); "
            f"estimated {est_h:.1f} h at {rate:.0f} rules/s on this machine; "
            "pass allow_exhaustive=True to proceed")

    scored: dict[int, tuple[int, int, int, int]] = {}
    start_index = 0
    ckpt_meta = (checkpoint_path + ".ckpt.json") if checkpoint_path else None
    if checkpoint_path and os.path.exists(checkpoint_path) and os.path.exists(ckpt_meta):
        with open(ckpt_meta) as fh:
            meta = json.load(fh)
        if meta.get("spec_hash") == spec.spec_hash and meta.get("seed") == spec.seed:
            for idx, (num, ex, ag, tr) in enumerate(meta.get("scored", [])):
                scored[idx] = (int(num), int(ex), int(ag), int(tr))
            start_index = int(meta.get("last_index", -1)) + 1
            print(f"resuming search at candidate {start_index}", file=sys.stderr)

    def flush(last_index: int) -> None:
        if not checkpoint_path:
            return
        ordered = [scored[i] for i in sorted(scored)]
        rows = [SearchResult(num, ex, ag, tr, spec) for num, ex, ag, tr in ordered]
        _atomic_write(checkpoint_path, results_csv(rows))
        _atomic_write(ckpt_meta, json.dumps({
            "last_index": last_index,
            "seed": spec.seed,
            "spec_hash": spec.spec_hash,
            "scored": [list(scored[i]) for i in sorted(scored)],
        }))

    todo = list(enumerate(candidates))[start_index:]
    if workers > 1 and todo:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            payloads = [(num, spec) for _, num in todo]
            for (idx, _), result in zip(todo,
                                        pool.map(_score_payload, payloads,
                                                 chunksize=max(1, len(todo) // (workers * 4)))):
                scored[idx] = result
                if (idx + 1) % checkpoint_every == 0:
                    flush(idx)
    else:
        for idx, number in todo:
            r = score_rule(rule_factory(number), spec)
            scored[idx] = (number, r.exact_hits, r.agree_cells, r.trials)
            if (idx + 1) % checkpoint_every == 0:
                flush(idx)
    if todo:
        flush(len(candidates) - 1)

    results = [SearchResult(num, ex, ag, tr, spec)
               for num, ex, ag, tr in (scored[i] for i in sorted(scored))]
    results.sort(key=lambda r: (-r.primary_metric, r.rule_number))
    return results[:top_k]
