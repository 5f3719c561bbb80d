"""Command line front end.

Every subcommand takes a master --seed, writes its data files plus a
RunManifest JSON into --outdir, and is deterministic: identical flags
give byte-identical data files, with wall time confined to the manifest.
On any error the partially written outputs are removed and the exit
status is nonzero.

Rule spellings accepted by --rule:

  e<number>              elementary rule, e.g. e232
  r<radius>:<number>     wider table, e.g. r2:4196304428
  gkl                    the two-sided sampled-majority rule
  gkl:a,b,0,c,d          same scheme on custom offsets
  maj:o1,o2,...          sampled majority on an odd offset list
  t2d:<nbhd>:<code>      outer-totalistic 2D rule, nbhd vonneumann5|moore9
  maj2d:dy,dx;dy,dx;...  sampled majority on grid offsets
  gkl2d                  the two-axis 2D variant
  shell:R[:w0,...,wR]    shell-weighted graph rule (graph subcommand)
  sort                   pair-sorting block rule

Graph spellings: ring:N, complete:N, lattice:H,W, gnm:N,M, regular:D,N.
The seeded constructions (gnm, regular) draw from the master seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import re
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .analysis import (adversarial_flip_search, build_stg, classify_states,
                       stg_to_csv, stg_to_dot, trajectory_outcome)
from .fileio import (RunManifest, cells_csv, curve_csv, grid_csv, matrix_csv,
                     pgm_bytes)
from .graphca import (NodeGraph, ShellRule, complete_graph, edge_list_text,
                      gnm_graph, graph_success_rate, graph_to_dot,
                      lattice_graph, regular_graph, ring_graph)
from .grid2d import (GKL2D, Rule2D, evolve2d, gkl2d, random_grid,
                     sampled_majority2d, spacetime_slice, totalistic2d)
from .multiway import (causal_graph, causal_to_dot, multiway_async_block,
                       multiway_async_ca, multiway_noise, multiway_to_dot)
from .rules import (Rule1D, as_cells, elementary_rule, evolve, gkl_rule,
                    is_uniform, radius_rule, random_config, sampled_majority)
from .search import (ScoreSpec, results_csv, sample_rule_numbers, search_rules)
from .seeding import rng_for
from .stochastic import (BlockRule, evolve_async, evolve_async_with_log,
                         evolve_block_async, evolve_noisy, phase_diagram,
                         sorting_rule)

log = logging.getLogger("consensuslab")

OUTDIR_ENV = "CONSENSUSLAB_OUTDIR"


def parse_rule_spec(text: str):
    """Parse a --rule spelling into a rule object; see the module docstring."""
    t = text.strip()
    if t == "gkl":
        return gkl_rule()
    if t == "gkl2d":
        return gkl2d()
    if t == "sort":
        return sorting_rule()
    m = re.fullmatch(r"e(\d+)", t)
    if m:
        return elementary_rule(int(m.group(1)))
    m = re.fullmatch(r"r(\d+):(\d+)", t)
    if m:
        return radius_rule(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"gkl:(-?\d+(?:,-?\d+)*)", t)
    if m:
        offsets = tuple(int(x) for x in m.group(1).split(","))
        if len(offsets) != 5:
            raise ValueError(f"gkl: needs exactly 5 offsets, got {len(offsets)}")
        return gkl_rule(offsets)  # type: ignore[arg-type]
    m = re.fullmatch(r"maj:(-?\d+(?:,-?\d+)*)", t)
    if m:
        return sampled_majority(tuple(int(x) for x in m.group(1).split(",")))
    m = re.fullmatch(r"t2d:(\w+):(\d+)", t)
    if m:
        return totalistic2d(m.group(1), int(m.group(2)))
    m = re.fullmatch(r"maj2d:(-?\d+,-?\d+(?:;-?\d+,-?\d+)*)", t)
    if m:
        pairs = tuple(tuple(int(x) for x in pair.split(","))
                      for pair in m.group(1).split(";"))
        return sampled_majority2d(pairs)
    m = re.fullmatch(r"shell:(\d+)(?::([^:]+))?", t)
    if m:
        weights = ()
        if m.group(2):
            weights = tuple(Fraction(w) for w in m.group(2).split(","))
        return ShellRule(radius=int(m.group(1)), weights=weights)
    raise ValueError(f"unrecognized rule spec {text!r}")


def parse_graph_spec(text: str, seed: int) -> NodeGraph:
    t = text.strip()
    m = re.fullmatch(r"(\w+):(\d+(?:,\d+)*)", t)
    if not m:
        raise ValueError(f"unrecognized graph spec {text!r}")
    kind = m.group(1)
    args = [int(x) for x in m.group(2).split(",")]
    builders = {
        "ring": (ring_graph, 1, False),
        "complete": (complete_graph, 1, False),
        "lattice": (lattice_graph, 2, False),
        "gnm": (gnm_graph, 2, True),
        "regular": (regular_graph, 2, True),
    }
    if kind not in builders:
        raise ValueError(f"unrecognized graph kind {kind!r}")
    builder, arity, seeded = builders[kind]
    if len(args) != arity:
        raise ValueError(f"graph kind {kind} takes {arity} integer(s)")
    return builder(*args, seed) if seeded else builder(*args)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _parse_init(text: str) -> np.ndarray:
    if not re.fullmatch(r"[01]+", text):
        raise ValueError("--init must be a string of 0s and 1s")
    return np.array([int(c) for c in text], dtype=np.int8)


class OutputSet:
    """Tracks this run's output files so a failed run can remove them."""

    def __init__(self, outdir: str, prefix: str):
        self.outdir = outdir
        self.prefix = prefix
        self.names: list[str] = []

    def path(self, suffix: str) -> str:
        name = f"{self.prefix}_{suffix}"
        self.names.append(name)
        return os.path.join(self.outdir, name)

    def write_text(self, suffix: str, text: str) -> None:
        target = self.path(suffix)
        with open(target, "w") as fh:
            fh.write(text)
        log.info("wrote %s", target)

    def write_bytes(self, suffix: str, data: bytes) -> None:
        target = self.path(suffix)
        with open(target, "wb") as fh:
            fh.write(data)
        log.info("wrote %s", target)

    def discard(self) -> None:
        for name in self.names:
            target = os.path.join(self.outdir, name)
            if os.path.exists(target):
                os.unlink(target)


def _first_uniform_row(history) -> int | None:
    for i, row in enumerate(history):
        if is_uniform(row):
            return i
    return None


def cmd_simulate(args, out: OutputSet) -> tuple[dict, dict]:
    rule = parse_rule_spec(args.rule)
    params = {"rule": args.rule, "steps": args.steps, "p": args.p}

    if isinstance(rule, (Rule1D, BlockRule)):
        if args.init:
            ic = _parse_init(args.init)
            params["init"] = args.init
        else:
            ic = random_config(args.n, args.p, rng_for(args.seed, 0))
            params["n"] = args.n
        if isinstance(rule, BlockRule):
            history = evolve_block_async(ic, rule, args.steps, rng_for(args.seed, 1))
            params["schedule"] = "block"
        elif args.schedule == "async":
            upr = args.updates_per_row or ic.size
            history = evolve_async(ic, rule, upr, args.steps, rng_for(args.seed, 1))
            params["schedule"] = "async"
            params["updates_per_row"] = upr
        elif args.q > 0:
            history = evolve_noisy(ic, rule, args.q, args.steps, rng_for(args.seed, 1))
            params["q"] = args.q
        else:
            history = evolve(ic, rule, args.steps)
        final = history[-1]
        out.write_bytes("spacetime.pgm", pgm_bytes(np.array(history)))
        out.write_text("final.csv", cells_csv(final))
        outcome = {
            "final_density": float(np.mean(final)),
            "consensus": int(final[0]) if is_uniform(final) else None,
            "first_uniform_row": _first_uniform_row(history),
        }
        return params, outcome

    if isinstance(rule, Rule2D):
        h, w = args.size
        grid = random_grid(h, w, args.p, rng_for(args.seed, 0))
        history = evolve2d(grid, rule, args.steps)
        final = history[-1]
        params["size"] = f"{h}x{w}"
        out.write_bytes("initial.pgm", pgm_bytes(history[0]))
        out.write_bytes("final.pgm", pgm_bytes(final))
        if args.slice_row is not None:
            out.write_bytes("slice.pgm", pgm_bytes(spacetime_slice(history, args.slice_row)))
            params["slice"] = args.slice_row
        out.write_text("final.csv", grid_csv(final))
        uniform = bool((final == final.flat[0]).all())
        outcome = {
            "final_density": float(np.mean(final)),
            "consensus": int(final.flat[0]) if uniform else None,
        }
        return params, outcome

    raise ValueError(f"rule spec {args.rule!r} cannot be simulated here; "
                     "shell rules belong to the graph subcommand")


def cmd_stg(args, out: OutputSet) -> tuple[dict, dict]:
    rule = parse_rule_spec(args.rule)
    if not isinstance(rule, Rule1D):
        raise ValueError("stg needs a one-dimensional rule")
    stg = build_stg(rule, args.n)
    report = classify_states(stg)
    out.write_text("stg.csv", stg_to_csv(stg, report))
    out.write_text("stg.dot", stg_to_dot(stg))
    outcome = {
        "states": report.total,
        "correct": report.correct,
        "wrong": report.wrong,
        "stuck": report.stuck,
        "tie_excluded": report.tie_excluded,
        "perfect": report.perfect,
    }
    log.info("n=%d: %d correct, %d wrong, %d stuck", args.n,
             report.correct, report.wrong, report.stuck)
    return {"rule": args.rule, "n": args.n}, outcome


def cmd_phase(args, out: OutputSet) -> tuple[dict, dict]:
    rule = parse_rule_spec(args.rule)
    if not isinstance(rule, Rule1D):
        raise ValueError("phase needs a one-dimensional rule")
    p_grid = _parse_floats(args.p_grid)
    q_grid = _parse_floats(args.q_grid)
    mat = phase_diagram(rule, args.n, args.steps, p_grid, q_grid,
                        args.trials, args.seed)
    out.write_text("phase.csv", matrix_csv(p_grid, q_grid, mat))
    params = {"rule": args.rule, "n": args.n, "steps": args.steps,
              "p_grid": list(p_grid), "q_grid": list(q_grid),
              "trials": args.trials}
    return params, {"mean_final_density_range": [float(mat.min()), float(mat.max())]}


def cmd_search(args, out: OutputSet) -> tuple[dict, dict]:
    table_bits = 2 ** (2 * args.radius + 1)
    spec = ScoreSpec(regime=args.regime, n=args.n, steps=args.steps,
                     updates_per_row=args.updates_per_row, q=args.q,
                     p_values=_parse_floats(args.p_grid), trials=args.trials,
                     seed=args.seed, metric=args.metric)
    if args.rules:
        candidates = [int(x) for x in args.rules.split(",")]
    elif args.all:
        candidates = range(2 ** table_bits)
    else:
        candidates = list(sample_rule_numbers(args.sample, args.seed, bits=table_bits))
    checkpoint = out.path("results.csv")
    results = search_rules(candidates, spec, top_k=args.top,
                           rule_factory=lambda num: radius_rule(args.radius, num),
                           checkpoint_path=checkpoint,
                           checkpoint_every=args.checkpoint_every,
                           workers=args.threads)
    # The resume sidecar is only useful mid-run.
    sidecar = checkpoint + ".ckpt.json"
    if os.path.exists(sidecar):
        os.unlink(sidecar)
    out.write_text("top.csv", results_csv(results))
    best = results[0]
    log.info("best rule %d scores %.4f (%s)", best.rule_number,
             best.primary_metric, spec.metric)
    params = {"regime": args.regime, "radius": args.radius, "n": args.n,
              "steps": args.steps, "updates_per_row": args.updates_per_row,
              "q": args.q, "p_grid": list(spec.p_values), "trials": args.trials,
              "metric": args.metric, "candidates": len(candidates),
              "spec_hash": spec.spec_hash}
    outcome = {"best_rule": best.rule_number,
               "best_metric": best.primary_metric,
               "top": [[r.rule_number, r.primary_metric] for r in results]}
    return params, outcome


def cmd_graph(args, out: OutputSet) -> tuple[dict, dict]:
    rule = parse_rule_spec(args.rule)
    if not isinstance(rule, ShellRule):
        raise ValueError("graph needs a shell:R rule")
    graph = parse_graph_spec(args.graph, args.seed)
    out.write_text("graph.dot", graph_to_dot(graph))
    out.write_text("graph.edges", edge_list_text(graph))
    max_steps = args.max_steps or None
    rate = graph_success_rate(graph, rule, args.trials, args.p, args.seed,
                              max_steps=max_steps)
    table = [["graph", "nodes", "edges", "p", "trials", "success_rate"],
             [args.graph, graph.n, graph.num_edges, repr(args.p),
              args.trials, repr(rate)]]
    outcome = {"success_rate": rate}
    if args.versus_ring:
        ring = ring_graph(graph.n)
        ring_rate = graph_success_rate(ring, rule, args.trials, args.p,
                                       args.seed, max_steps=max_steps)
        table.append([f"ring:{graph.n}", ring.n, ring.num_edges,
                      repr(args.p), args.trials, repr(ring_rate)])
        outcome["ring_success_rate"] = ring_rate
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(table)
    out.write_text("success.csv", buf.getvalue())
    log.info("success rate %.3f on %s", rate, args.graph)
    params = {"graph": args.graph, "rule": args.rule, "p": args.p,
              "trials": args.trials, "versus_ring": args.versus_ring}
    return params, outcome


def cmd_multiway(args, out: OutputSet) -> tuple[dict, dict]:
    rule = parse_rule_spec(args.rule)
    init = _parse_init(args.init)
    max_nodes = args.max_nodes
    if isinstance(rule, BlockRule):
        mw = multiway_async_block(rule, init, args.generations, max_nodes)
        mode = "block"
    elif isinstance(rule, Rule1D):
        if args.mode == "noise":
            if args.generations is None:
                raise ValueError("--mode noise needs --generations")
            mw = multiway_noise(rule, init, args.generations, max_nodes)
        else:
            mw = multiway_async_ca(rule, init, args.generations, max_nodes)
        mode = args.mode
    else:
        raise ValueError("multiway needs a one-dimensional or block rule")
    out.write_text("multiway.dot", multiway_to_dot(mw))
    if args.causal_updates:
        if not isinstance(rule, Rule1D):
            raise ValueError("--causal-updates needs a one-dimensional rule")
        _, update_log = evolve_async_with_log(init, rule, 1, args.causal_updates,
                                              rng_for(args.seed, 1))
        cg = causal_graph(update_log, rule.offsets, init.size)
        out.write_text("causal.dot", causal_to_dot(cg))
    n = mw.n
    terminals = sorted(format(s, f"0{n}b")[::-1] for s in mw.terminals)
    outcome = {
        "states": len(mw.states),
        "edges": len(mw.edges),
        "terminals": terminals,
        "confluent": mw.confluent,
        "truncated": mw.truncated,
    }
    log.info("%d states, %d terminals, confluent=%s",
             len(mw.states), len(terminals), mw.confluent)
    params = {"rule": args.rule, "init": args.init, "mode": mode,
              "generations": args.generations, "max_nodes": max_nodes}
    return params, outcome


def cmd_attack(args, out: OutputSet) -> tuple[dict, dict]:
    rule = parse_rule_spec(args.rule)
    if not isinstance(rule, Rule1D):
        raise ValueError("attack needs a one-dimensional rule")
    if args.init:
        config = _parse_init(args.init)
    else:
        config = random_config(args.n, args.p, rng_for(args.seed, 0))
    baseline_kind, baseline_value = trajectory_outcome(config, rule, args.steps)
    flips = adversarial_flip_search(rule, config, args.max_flips, args.steps)
    out.write_text("config.csv", cells_csv(config))
    lines = ["position"] + [str(i) for i in (flips or ())]
    out.write_text("attack.csv", "\n".join(lines) + "\n")
    outcome: dict = {"baseline": [baseline_kind, baseline_value],
                     "flips": list(flips) if flips is not None else None}
    if flips is not None:
        attacked = config.copy()
        attacked[list(flips)] ^= 1
        kind, value = trajectory_outcome(attacked, rule, args.steps)
        outcome["flipped"] = [kind, value]
        log.info("outcome flips with %d bit(s): %s", len(flips), list(flips))
    else:
        log.info("no flip set of size <= %d changes the outcome", args.max_flips)
    params = {"rule": args.rule, "p": args.p, "max_flips": args.max_flips,
              "steps": args.steps}
    if args.init:
        params["init"] = args.init
    else:
        params["n"] = args.n
    return params, outcome


def _size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0,
                     help="master seed; the only source of randomness")
    sub.add_argument("--outdir", default=None,
                     help=f"output directory (default ${OUTDIR_ENV} or .)")
    sub.add_argument("--prefix", default=None,
                     help="output filename prefix (default: subcommand name)")
    sub.add_argument("--quiet", action="store_true", help="errors only")
    sub.add_argument("--verbose", action="store_true", help="progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensuslab",
        description="Majority-consensus cellular automata: simulation, "
                    "exact analysis, multiway exploration, and rule search.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sim = subs.add_parser("simulate", help="run one trajectory, write images")
    sim.add_argument("--rule", required=True)
    sim.add_argument("--n", type=int, default=99)
    sim.add_argument("--p", type=float, default=0.4)
    sim.add_argument("--init", default=None, help="explicit 0/1 start string")
    sim.add_argument("--steps", type=int, default=200)
    sim.add_argument("--schedule", choices=["sync", "async"], default="sync")
    sim.add_argument("--updates-per-row", type=int, default=0,
                     help="async updates per rendered row (default: n)")
    sim.add_argument("--q", type=float, default=0.0, help="per-cell flip noise")
    sim.add_argument("--size", type=_size, default=(64, 64),
                     help="grid HxW for 2D rules")
    sim.add_argument("--slice", dest="slice_row", type=int, default=None,
                     help="also write the spacetime slice of this grid row")
    sim.set_defaults(func=cmd_simulate)

    stg = subs.add_parser("stg", help="exact state-transition graph")
    stg.add_argument("--rule", required=True)
    stg.add_argument("--n", type=int, required=True)
    stg.set_defaults(func=cmd_stg)

    phase = subs.add_parser("phase", help="mean final density over (p, q)")
    phase.add_argument("--rule", required=True)
    phase.add_argument("--n", type=int, default=99)
    phase.add_argument("--steps", type=int, default=300)
    phase.add_argument("--p-grid", default="0.1,0.2,0.3,0.4,0.6,0.7,0.8,0.9")
    phase.add_argument("--q-grid", default="0.0")
    phase.add_argument("--trials", type=int, default=20)
    phase.set_defaults(func=cmd_phase)

    search = subs.add_parser("search", help="score candidate rule tables")
    search.add_argument("--regime", choices=["sync", "async", "noisy"],
                        default="sync")
    search.add_argument("--radius", type=int, choices=[1, 2], default=2)
    search.add_argument("--n", type=int, default=99)
    search.add_argument("--steps", type=int, default=300)
    search.add_argument("--updates-per-row", type=int, default=0,
                        help="async updates per row (default: 2n)")
    search.add_argument("--q", type=float, default=0.0)
    search.add_argument("--p-grid",
                        default="0.3,0.35,0.4,0.45,0.55,0.6,0.65,0.7")
    search.add_argument("--trials", type=int, default=40)
    search.add_argument("--metric", choices=["exact", "agree"], default="exact")
    group = search.add_mutually_exclusive_group(required=True)
    group.add_argument("--sample", type=int, help="score this many sampled tables")
    group.add_argument("--rules", help="comma-separated rule numbers")
    group.add_argument("--all", action="store_true",
                       help="score every table of the given radius")
    search.add_argument("--top", type=int, default=10)
    search.add_argument("--threads", type=int, default=1,
                        help="worker processes; does not affect results")
    search.add_argument("--checkpoint-every", type=int, default=10_000)
    search.set_defaults(func=cmd_search)

    graph = subs.add_parser("graph", help="consensus success rate on a graph")
    graph.add_argument("--graph", required=True)
    graph.add_argument("--rule", default="shell:1")
    graph.add_argument("--p", type=float, default=0.7)
    graph.add_argument("--trials", type=int, default=100)
    graph.add_argument("--max-steps", type=int, default=0,
                       help="per-trial step cap (default: 10n)")
    graph.add_argument("--versus-ring", action="store_true",
                       help="also score the ring with the same node count")
    graph.set_defaults(func=cmd_graph)

    mw = subs.add_parser("multiway", help="branch over all update choices")
    mw.add_argument("--rule", required=True)
    mw.add_argument("--init", required=True, help="0/1 start string")
    mw.add_argument("--mode", choices=["async", "noise"], default="async")
    mw.add_argument("--generations", type=int, default=None,
                    help="layer cap (default: run async/block to closure)")
    mw.add_argument("--max-nodes", type=int, default=100_000)
    mw.add_argument("--causal-updates", type=int, default=0,
                    help="also write the causal graph of one sequential run "
                         "with this many updates")
    mw.set_defaults(func=cmd_multiway)

    attack = subs.add_parser("attack",
                             help="smallest flip set that changes the outcome")
    attack.add_argument("--rule", default="gkl")
    attack.add_argument("--n", type=int, default=49)
    attack.add_argument("--p", type=float, default=0.6)
    attack.add_argument("--init", default=None, help="explicit 0/1 start string")
    attack.add_argument("--max-flips", type=int, default=2)
    attack.add_argument("--steps", type=int, default=500)
    attack.set_defaults(func=cmd_attack)

    for sub in subs.choices.values():
        _add_common(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (
        logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(message)s", force=True)

    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(outdir, exist_ok=True)
    out = OutputSet(outdir, args.prefix or args.subcommand)
    started = time.perf_counter()
    try:
        params, outcome = args.func(args, out)
    except (ValueError, OverflowError, MemoryError) as exc:
        log.error("%s", exc)
        out.discard()
        return 1
    manifest = RunManifest(subcommand=args.subcommand, parameters=params,
                           seed=args.seed, version=__version__,
                           outputs=list(out.names), outcome=outcome,
                           wall_time_s=round(time.perf_counter() - started, 6))
    target = os.path.join(outdir, f"{out.prefix}_manifest.json")
    with open(target, "w") as fh:
        fh.write(manifest.to_json())
    log.info("wrote %s", target)
    return 0


if __name__ == "__main__":
    sys.exit(main())
