#!/usr/bin/env python3
"""Recompute every frozen number in tests/data/golden.json from scratch.

The suite compares against the committed file; rerunning this script must
reproduce it bit for bit. Each block records the parameters it was derived
with, so a mismatch points at a behavior change, not a bookkeeping one.
"""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from consensuslab.analysis import (adversarial_flip_search, build_stg,
                                   classify_states, trajectory_outcome)
from consensuslab.graphca import (ShellRule, graph_success_rate, regular_graph,
                                  ring_graph)
from consensuslab.grid2d import (exact_density_grid, is_uniform2d,
                                 sampled_majority2d, settle2d, totalistic2d)
from consensuslab.multiway import multiway_async_ca
from consensuslab.rules import (elementary_rule, exact_density_config,
                                gkl_rule, random_config)
from consensuslab.seeding import rng_for
from consensuslab.stochastic import evolve_noisy

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "data", "golden.json")


def stg_counts() -> dict:
    gkl = gkl_rule()
    out = {}
    for n in (5, 7, 11):
        report = classify_states(build_stg(gkl, n))
        out[f"gkl_n{n}"] = {"correct": report.correct, "wrong": report.wrong,
                            "stuck": report.stuck}
    out["e232_n7"] = {"stuck": classify_states(build_stg(elementary_rule(232), 7)).stuck}
    return out


def async_witnesses() -> dict:
    # Rule 232 under single-cell updates: order of updates can decide the
    # outcome, so these states have two reachable terminals.
    r232 = elementary_rule(232)
    out = {}
    for label, n, packed in (("n2_state1", 2, 1), ("n4_state5", 4, 5)):
        cells = [(packed >> i) & 1 for i in range(n)]
        mw = multiway_async_ca(r232, cells)
        out[label] = {"n": n, "initial": packed,
                      "terminals": sorted(mw.terminals),
                      "confluent": mw.confluent}
    return out


def attack_cases() -> dict:
    gkl = gkl_rule()
    out = {}
    cfg = exact_density_config(49, 0.6, rng_for(13, 0))
    flips = adversarial_flip_search(gkl, cfg, 2, 500)
    out["n49_margin9"] = {"seed": 13, "exact_density": True, "ones": int(cfg.sum()),
                          "baseline": list(trajectory_outcome(cfg, gkl, 500)),
                          "flips": list(flips) if flips else None}
    cfg = random_config(25, 0.6, rng_for(0, 0))
    flips = adversarial_flip_search(gkl, cfg, 2, 500)
    out["n25_bernoulli"] = {"seed": 0, "exact_density": False, "ones": int(cfg.sum()),
                            "baseline": list(trajectory_outcome(cfg, gkl, 500)),
                            "flips": list(flips) if flips else None}
    return out


def noisy_rates() -> dict:
    # Success = final density above 0.75 toward the initial majority of 1s.
    gkl = gkl_rule()
    n, p, trials, steps, threshold = 199, 0.6, 50, 300, 0.75
    rates = {}
    for qi, q in enumerate((0.0, 0.005, 0.1)):
        hits = 0
        for t in range(trials):
            rng = rng_for(11, qi, t)
            ic = exact_density_config(n, p, rng)
            hits += int(float(np.mean(evolve_noisy(ic, gkl, q, steps, rng)[-1])) > threshold)
        rates[str(q)] = hits / trials
    return {"seed": 11, "n": n, "p": p, "trials": trials, "steps": steps,
            "threshold": threshold, "rates": rates}


def grid_outcomes() -> dict:
    rules = {"code56": totalistic2d("vonneumann5", 56),
             "code976": totalistic2d("moore9", 976),
             "nec": sampled_majority2d(((0, 0), (0, 1), (1, 0)))}
    out = {"seed": 0, "shape": [64, 64], "p": 0.3, "max_steps": 1000, "seeds": 10}
    for name, rule in rules.items():
        tally = {"uniform0": 0, "uniform1": 0, "nonuniform_fixed": 0,
                 "nonuniform_cycling": 0}
        for t in range(10):
            grid = exact_density_grid(64, 64, 0.3, rng_for(0, t))
            final, _, kind = settle2d(grid, rule, 1000)
            if is_uniform2d(final):
                tally["uniform1" if final.flat[0] else "uniform0"] += 1
            elif kind == "fixed":
                tally["nonuniform_fixed"] += 1
            else:
                tally["nonuniform_cycling"] += 1
        out[name] = tally
    return out


def graph_rates() -> dict:
    rule = ShellRule(radius=1)
    reg = regular_graph(4, 30, 1)
    return {"seed": 12, "graph_seed": 1, "n": 30, "p": 0.7, "trials": 200,
            "regular4": graph_success_rate(reg, rule, 200, 0.7, 12),
            "ring": graph_success_rate(ring_graph(30), rule, 200, 0.7, 12)}


def main() -> int:
    golden = {
        "stg": stg_counts(),
        "rule232_async_witnesses": async_witnesses(),
        "gkl_flip_attacks": attack_cases(),
        "gkl_noisy_success": noisy_rates(),
        "grid64_outcomes": grid_outcomes(),
        "shell_graph_success": graph_rates(),
    }
    text = json.dumps(golden, indent=2, sort_keys=True) + "\n"
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as fh:
        fh.write(text)
    print(f"wrote {os.path.normpath(OUT)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
